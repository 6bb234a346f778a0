//! Energy traces, constrained minimization, effective resistance and the
//! unbounded-resistance construction.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::ExecMode;
use crate::measure::{restrict, CylinderFunction, LevelVector, PointEvaluator};
use crate::numeric::{
    format_rational, int, ratio, solve_f64, solve_linear, to_f64, Rational, RationalMatrix,
};
use crate::operators::DifferenceOperator;
use crate::shift::{enumerate_level, Alphabet, Point};

/// Whether an energy trace is known to have reached its limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LimitFlag {
    /// Cylinder function past its depth: every later value is equal.
    Stabilized,
    /// The last step still increased.
    Growing,
    /// Last two values equal but the input is not known to be locally constant.
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnergyTrace {
    pub entries: Vec<(usize, Rational)>,
    pub flag: Option<LimitFlag>,
}

/// `𝔈_{H_m}(u|_{V_m})` for `m = 0..=m_max`.
pub fn energy_trace(u: &dyn PointEvaluator, m_max: usize, mode: ExecMode) -> Result<EnergyTrace> {
    let alphabet = u.alphabet();
    let mut entries = Vec::with_capacity(m_max + 1);
    for m in 0..=m_max {
        let op = DifferenceOperator::new(alphabet, m)?;
        let v = restrict(u, op.levels(), mode);
        entries.push((m, op.energy(&v)?));
    }
    let flag = match entries.as_slice() {
        [.., (_, prev), (m, last)] => Some(if last != prev {
            LimitFlag::Growing
        } else if u.cylinder_depth().is_some_and(|k| *m + 1 >= k) {
            LimitFlag::Stabilized
        } else {
            LimitFlag::Undetermined
        }),
        _ => None,
    };
    Ok(EnergyTrace { entries, flag })
}

/// `ℰ(f) = 𝔈_{H_{K-1}}(f|_{V_{K-1}})` for a depth-`K` function; 0 for `K = 0`.
pub fn energy_of_cylinder(f: &CylinderFunction) -> Result<Rational> {
    let f = f.coarsen();
    if f.depth() == 0 {
        return Ok(Rational::zero());
    }
    let op = DifferenceOperator::new(f.alphabet(), f.depth() - 1)?;
    let v = restrict(&f, op.levels(), ExecMode::default());
    op.energy(&v)
}

/// Exact constrained minimum of `𝔈_{H_m}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstrainedMinimum {
    pub energy: Rational,
    pub minimizer: LevelVector,
}

struct Reduced {
    free: Vec<usize>,
    fixed: HashMap<usize, Rational>,
}

fn reduce(op: &DifferenceOperator, constraints: &[(Point, Rational)]) -> Result<Reduced> {
    if constraints.is_empty() {
        return Err(Error::NoConstraints);
    }
    let mut fixed = HashMap::new();
    for (p, v) in constraints {
        op.alphabet().check_point(p)?;
        let i = op
            .levels()
            .position(p)
            .ok_or_else(|| Error::DepthExceedsLevel {
                point: p.to_string(),
                depth: p.depth(),
                level: op.level(),
            })?;
        fixed.insert(i, v.clone());
    }
    let free = (0..op.len()).filter(|i| !fixed.contains_key(i)).collect();
    Ok(Reduced { free, fixed })
}

/// Minimizes `𝔈_{H_m}` subject to pinned values by solving
/// `(H_m u)(p) = 0` at every unconstrained `p`.
pub fn min_energy_with_constraints(
    alphabet: Alphabet,
    m: usize,
    constraints: &[(Point, Rational)],
) -> Result<ConstrainedMinimum> {
    let op = DifferenceOperator::new(alphabet, m)?;
    min_energy_on(&op, constraints)
}

pub fn min_energy_on(
    op: &DifferenceOperator,
    constraints: &[(Point, Rational)],
) -> Result<ConstrainedMinimum> {
    let Reduced { free, fixed } = reduce(op, constraints)?;
    let mut values = vec![Rational::zero(); op.len()];
    for (&i, v) in &fixed {
        values[i] = v.clone();
    }
    if !free.is_empty() {
        let col: HashMap<usize, usize> = free.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let mut a = RationalMatrix::zeros(free.len(), free.len());
        let mut rhs = vec![Rational::zero(); free.len()];
        for (r, &i) in free.iter().enumerate() {
            a.set(r, r, int(op.diagonal(i)));
            for &j in op.neighbours(i) {
                match col.get(&j) {
                    Some(&c) => a.set(r, c, Rational::one()),
                    None => rhs[r] -= &fixed[&j],
                }
            }
        }
        // nonempty constraints make the reduced operator definite
        let x = solve_linear(&a, &rhs)?;
        for (k, &i) in free.iter().enumerate() {
            values[i] = x[k].clone();
        }
    }
    let minimizer = LevelVector::new(op.alphabet(), op.level(), values)?;
    Ok(ConstrainedMinimum {
        energy: op.energy(&minimizer)?,
        minimizer,
    })
}

/// Floating-point counterpart of [`min_energy_on`].
#[derive(Debug, Clone, PartialEq)]
pub struct FloatMinimum {
    pub energy: f64,
    pub minimizer: Vec<f64>,
    /// `max |A x - b|` of the reduced system.
    pub residual: f64,
}

pub fn min_energy_on_f64(
    op: &DifferenceOperator,
    constraints: &[(Point, Rational)],
    mode: ExecMode,
) -> Result<FloatMinimum> {
    let Reduced { free, fixed } = reduce(op, constraints)?;
    let mut values = vec![0.0; op.len()];
    for (&i, v) in &fixed {
        values[i] = to_f64(v);
    }
    let mut residual = 0.0;
    if !free.is_empty() {
        let n = free.len();
        let col: HashMap<usize, usize> = free.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let mut a = vec![0.0; n * n];
        let mut rhs = vec![0.0; n];
        for (r, &i) in free.iter().enumerate() {
            a[r * n + r] = op.diagonal(i) as f64;
            for &j in op.neighbours(i) {
                match col.get(&j) {
                    Some(&c) => a[r * n + c] = 1.0,
                    None => rhs[r] -= values[j],
                }
            }
        }
        let sol = solve_f64(&a, n, &rhs, mode)?;
        residual = sol.residual;
        for (k, &i) in free.iter().enumerate() {
            values[i] = sol.x[k];
        }
    }
    let mut energy = 0.0;
    for i in 0..op.len() {
        let hv: f64 = op.diagonal(i) as f64 * values[i]
            + op.neighbours(i).iter().map(|&j| values[j]).sum::<f64>();
        energy -= values[i] * hv;
    }
    Ok(FloatMinimum {
        energy,
        minimizer: values,
        residual,
    })
}

/// Which linear solver computes a resistance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverChoice {
    Exact,
    Float,
    /// Exact up to [`EXACT_SOLVE_CAP`] points, floating point beyond.
    #[default]
    Auto,
}

/// Largest `|V_m|` solved exactly under [`SolverChoice::Auto`].
pub const EXACT_SOLVE_CAP: usize = 500;

#[derive(Debug, Clone, PartialEq)]
pub enum ResistanceValue {
    Exact {
        min_energy: Rational,
        resistance: Rational,
        minimizer: LevelVector,
    },
    Float {
        min_energy: f64,
        resistance: f64,
        residual: f64,
        minimizer: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResistanceResult {
    pub a: Point,
    pub b: Point,
    pub level: usize,
    pub value: ResistanceValue,
}

impl ResistanceResult {
    pub fn min_energy_f64(&self) -> f64 {
        match &self.value {
            ResistanceValue::Exact { min_energy, .. } => to_f64(min_energy),
            ResistanceValue::Float { min_energy, .. } => *min_energy,
        }
    }

    pub fn resistance_f64(&self) -> f64 {
        match &self.value {
            ResistanceValue::Exact { resistance, .. } => to_f64(resistance),
            ResistanceValue::Float { resistance, .. } => *resistance,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.value, ResistanceValue::Exact { .. })
    }

    /// JSON summary: pair, level, energies and the comparison with `m + 1`.
    pub fn to_json(&self) -> serde_json::Value {
        let bound = self.level as f64 + 1.0;
        let mut v = serde_json::json!({
            "a": self.a.to_string(),
            "b": self.b.to_string(),
            "level": self.level,
            "min_energy_decimal": crate::numeric::decimal_f64(self.min_energy_f64()),
            "resistance_decimal": crate::numeric::decimal_f64(self.resistance_f64()),
            "level_plus_one": self.level + 1,
        });
        match &self.value {
            ResistanceValue::Exact {
                min_energy,
                resistance,
                ..
            } => {
                v["solver"] = "exact".into();
                v["min_energy"] = format_rational(min_energy).into();
                v["resistance"] = format_rational(resistance).into();
                v["exceeds_level_plus_one"] = (resistance > &int(self.level as i64 + 1)).into();
            }
            ResistanceValue::Float {
                residual,
                resistance,
                ..
            } => {
                v["solver"] = "float".into();
                v["residual"] = (*residual).into();
                v["exceeds_level_plus_one"] = (*resistance > bound).into();
            }
        }
        v
    }
}

/// `R(a, b)` at level `max(depth a, depth b)`.
pub fn effective_resistance(
    alphabet: Alphabet,
    a: &Point,
    b: &Point,
    solver: SolverChoice,
    mode: ExecMode,
) -> Result<ResistanceResult> {
    if a == b {
        return Err(Error::SamePoint);
    }
    let level = a.depth().max(b.depth());
    resistance_at_level(alphabet, a, b, level, solver, mode)
}

/// The same constrained problem posed at any level `≥ max(depth a, depth b)`.
pub fn resistance_at_level(
    alphabet: Alphabet,
    a: &Point,
    b: &Point,
    level: usize,
    solver: SolverChoice,
    mode: ExecMode,
) -> Result<ResistanceResult> {
    if a == b {
        return Err(Error::SamePoint);
    }
    let op = DifferenceOperator::new(alphabet, level)?;
    let constraints = [(a.clone(), Rational::one()), (b.clone(), Rational::zero())];
    let exact = match solver {
        SolverChoice::Exact => true,
        SolverChoice::Float => false,
        SolverChoice::Auto => op.len() <= EXACT_SOLVE_CAP,
    };
    let value = if exact {
        let min = min_energy_on(&op, &constraints)?;
        ResistanceValue::Exact {
            resistance: min.energy.recip(),
            min_energy: min.energy,
            minimizer: min.minimizer,
        }
    } else {
        let min = min_energy_on_f64(&op, &constraints, mode)?;
        ResistanceValue::Float {
            resistance: 1.0 / min.energy,
            min_energy: min.energy,
            residual: min.residual,
            minimizer: min.minimizer,
        }
    };
    Ok(ResistanceResult {
        a: a.clone(),
        b: b.clone(),
        level,
        value,
    })
}

/// Whether `(a, b)` satisfies `a_i ≠ a_{i+1}`, `b_i ≠ b_{i+1}`, `a_i ≠ b_i`
/// for `1 ≤ i ≤ m`, with both points of depth exactly `m`.
pub fn is_unbounded_pair(a: &Point, b: &Point, m: usize) -> bool {
    a.depth() == m
        && b.depth() == m
        && (1..=m).all(|i| {
            a.symbol(i) != a.symbol(i + 1)
                && b.symbol(i) != b.symbol(i + 1)
                && a.symbol(i) != b.symbol(i)
        })
}

/// A deterministic pair for [`is_unbounded_pair`]: `a` alternates `1 2 1 …`,
/// `b` takes the smallest admissible symbol at each position.
pub fn unbounded_pair(alphabet: Alphabet, m: usize) -> Result<(Point, Point)> {
    if m == 0 {
        return Err(Error::NoAdmissiblePair {
            n: alphabet.size(),
            m,
        });
    }
    let a: Vec<u8> = (0..=m).map(|i| if i % 2 == 0 { 1 } else { 2 }).collect();
    let mut b: Vec<u8> = Vec::with_capacity(m + 1);
    for (i, &ai) in a.iter().enumerate() {
        let prev = b.last().copied();
        let next = alphabet
            .symbols()
            .find(|&l| Some(l) != prev && (i == m || l != ai))
            .ok_or(Error::NoAdmissiblePair {
                n: alphabet.size(),
                m,
            })?;
        b.push(next);
    }
    let pa = Point::new(a[..m].to_vec(), a[m]);
    let pb = Point::new(b[..m].to_vec(), b[m]);
    debug_assert!(is_unbounded_pair(&pa, &pb, m));
    Ok((pa, pb))
}

/// `1/(2m(N-1))`, the bound on each increment.
pub fn increment_bound(alphabet: Alphabet, m: usize) -> Rational {
    ratio(1, (2 * m * (alphabet.size() - 1)) as i64)
}

/// `6(m²-m-1) / ((m⁴+m)(N-1)²(2N²-N))`, the bound on `δ₁² + δ₂²`.
pub fn square_sum_bound(alphabet: Alphabet, m: usize) -> Rational {
    let (n, m) = (alphabet.size() as i64, m as i64);
    Rational::new(
        BigInt::from(6 * (m * m - m - 1)),
        BigInt::from((m.pow(4) + m) * (n - 1).pow(2) * (2 * n * n - n)),
    )
}

/// Half the tighter of the two bounds, the square-sum bound being turned
/// into a per-increment bound through a rational lower estimate of
/// `sqrt(B/2)`.
pub fn default_increments(alphabet: Alphabet, m: usize) -> Result<Rational> {
    if m < 2 {
        return Err(Error::LevelTooSmall { min: 2, got: m });
    }
    let scale = BigInt::from(10u64).pow(12);
    let half = square_sum_bound(alphabet, m) / int(2);
    let scaled = (half * Rational::from_integer(&scale * &scale))
        .floor()
        .to_integer();
    let root = Rational::new(scaled.sqrt(), scale);
    let bound = increment_bound(alphabet, m);
    Ok(if root < bound { root } else { bound } / int(2))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub a: Point,
    pub b: Point,
    pub values: LevelVector,
    pub energy: Rational,
    /// `1 / (m + 1)`.
    pub threshold: Rational,
    pub below_threshold: bool,
}

/// The explicit test function: `1` at `a`, decreasing by `δ₁` along the
/// classes generated by `a`, `0` at `b`, increasing by `δ₂` along the
/// classes generated by `b`, and `u(ȧ₁) - (δ₁+δ₂)/2` elsewhere.
pub fn resistance_witness(
    alphabet: Alphabet,
    m: usize,
    d1: &Rational,
    d2: &Rational,
) -> Result<Witness> {
    if m < 2 {
        return Err(Error::LevelTooSmall { min: 2, got: m });
    }
    let bound = increment_bound(alphabet, m);
    for (which, d) in [("delta1", d1), ("delta2", d2)] {
        if !d.is_positive() || d >= &bound {
            return Err(Error::InadmissibleIncrement {
                which,
                value: format_rational(d),
                bound: format!("(0, {})", format_rational(&bound)),
            });
        }
    }
    let sq = square_sum_bound(alphabet, m);
    if d1 * d1 + d2 * d2 >= sq {
        return Err(Error::InadmissibleIncrement {
            which: "delta1^2 + delta2^2",
            value: format_rational(&(d1 * d1 + d2 * d2)),
            bound: format!("< {}", format_rational(&sq)),
        });
    }
    let (a, b) = unbounded_pair(alphabet, m)?;
    let levels = enumerate_level(alphabet, m)?;
    let nm1 = alphabet.size() - 1;
    let top_a = Rational::one() - int((m * nm1) as i64) * d1;
    let rest = &top_a - (d1 + d2) / int(2);
    let mut values = vec![rest; levels.len()];
    let mut assign = |p: &Point, v: Rational| {
        values[levels.position(p).expect("chain point lies in V_m")] = v;
    };
    for (end, start, step) in [
        (&a, Rational::one(), -d1.clone()),
        (&b, Rational::zero(), d2.clone()),
    ] {
        assign(end, start.clone());
        for (k, p) in chain_schedule(alphabet, end, m).iter().enumerate() {
            assign(p, &start + int(k as i64 + 1) * &step);
        }
    }
    let values = LevelVector::new(alphabet, m, values)?;
    let op = DifferenceOperator::from_levels(std::sync::Arc::new(levels));
    let energy = op.energy(&values)?;
    let threshold = ratio(1, m as i64 + 1);
    Ok(Witness {
        below_threshold: energy < threshold,
        a,
        b,
        values,
        energy,
        threshold,
    })
}

/// Points of the classes `[x₁…x_i]|_{V_i}`, `i = m, m-1, …, 1`, in
/// schedule order, excluding `x` itself. Within a class the points other
/// than the exit `(x₁…x_{i-1} ẋ_i)` come first, by increasing symbol.
pub fn chain_schedule(alphabet: Alphabet, x: &Point, m: usize) -> Vec<Point> {
    let mut out = Vec::with_capacity(m * (alphabet.size() - 1));
    for i in (1..=m).rev() {
        let head = x.first_symbols(i);
        let (exit, entry) = (x.symbol(i), x.symbol(i + 1));
        for l in alphabet.symbols().filter(|&l| l != exit && l != entry) {
            out.push(Point::new(head.clone(), l));
        }
        out.push(Point::new(head, exit));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{indicator, min_energy_extension};

    fn a(n: usize) -> Alphabet {
        Alphabet::new(n).unwrap()
    }

    fn pt(s: &str) -> Point {
        s.parse().unwrap()
    }

    #[test]
    fn trace_examples() {
        let c = CylinderFunction::constant(a(2), int(3));
        let t = energy_trace(&c, 3, ExecMode::Sequential).unwrap();
        assert!(t.entries.iter().all(|(_, e)| e.is_zero()));

        let v0 = enumerate_level(a(2), 0).unwrap();
        let v = LevelVector::new(a(2), 0, vec![int(1), int(0)]).unwrap();
        let h = min_energy_extension(&v, &v0).unwrap();
        let t = energy_trace(&h, 4, ExecMode::Parallel).unwrap();
        assert!(t.entries.iter().all(|(_, e)| e == &int(1)));
        assert_eq!(t.flag, Some(LimitFlag::Stabilized));

        let chi = indicator(a(3), &pt("~1"), 0).unwrap();
        let t = energy_trace(&chi, 3, ExecMode::Sequential).unwrap();
        assert!(t.entries.iter().all(|(_, e)| e == &int(2)));
        assert_eq!(t.flag, Some(LimitFlag::Stabilized));
    }

    #[test]
    fn cylinder_energy_examples() {
        assert!(
            energy_of_cylinder(&CylinderFunction::constant(a(2), int(4)))
                .unwrap()
                .is_zero()
        );
        let f = CylinderFunction::new(a(2), 1, vec![int(1), int(0)]).unwrap();
        assert_eq!(energy_of_cylinder(&f).unwrap(), int(1));
        let f = CylinderFunction::new(a(2), 2, vec![int(1), int(1), int(0), int(0)]).unwrap();
        assert_eq!(energy_of_cylinder(&f).unwrap(), int(1));
    }

    #[test]
    fn constrained_examples() {
        let r = min_energy_with_constraints(a(2), 0, &[(pt("~1"), int(1)), (pt("~2"), int(0))])
            .unwrap();
        assert_eq!(r.energy, int(1));
        assert_eq!(r.minimizer.values(), &[int(1), int(0)]);

        let r = min_energy_with_constraints(a(3), 0, &[(pt("~1"), int(1)), (pt("~2"), int(0))])
            .unwrap();
        assert_eq!(r.energy, ratio(3, 2));
        assert_eq!(r.minimizer.values()[2], ratio(1, 2));

        let all = [
            (pt("~1"), int(1)),
            (pt("~2"), int(0)),
            (pt("~3"), ratio(1, 2)),
        ];
        assert_eq!(
            min_energy_with_constraints(a(3), 0, &all).unwrap().energy,
            ratio(3, 2)
        );

        assert_eq!(
            min_energy_with_constraints(a(3), 0, &[]),
            Err(Error::NoConstraints)
        );
        assert!(min_energy_with_constraints(a(3), 0, &[(pt("1~2"), int(1))]).is_err());
    }

    #[test]
    fn minimizer_is_harmonic_off_constraints() {
        let op = DifferenceOperator::new(a(3), 2).unwrap();
        let (p, q) = unbounded_pair(a(3), 2).unwrap();
        let r = min_energy_on(&op, &[(p.clone(), int(1)), (q.clone(), int(0))]).unwrap();
        let hu = op.apply(&r.minimizer, ExecMode::Sequential).unwrap();
        for (i, pt) in op.levels().points().iter().enumerate() {
            if pt != &p && pt != &q {
                assert!(hu.values()[i].is_zero());
            }
        }
    }

    #[test]
    fn resistance_examples() {
        let seq = ExecMode::Sequential;
        let r = effective_resistance(a(2), &pt("~1"), &pt("~2"), SolverChoice::Exact, seq).unwrap();
        assert_eq!(r.resistance_f64(), 1.0);
        let r = effective_resistance(a(3), &pt("~1"), &pt("~2"), SolverChoice::Exact, seq).unwrap();
        match r.value {
            ResistanceValue::Exact { resistance, .. } => assert_eq!(resistance, ratio(2, 3)),
            _ => panic!("exact solver requested"),
        }
        let (p, q) = unbounded_pair(a(3), 2).unwrap();
        let r = effective_resistance(a(3), &p, &q, SolverChoice::Auto, seq).unwrap();
        assert!(r.resistance_f64() > 3.0);
        assert_eq!(
            effective_resistance(a(3), &p, &p, SolverChoice::Auto, seq),
            Err(Error::SamePoint)
        );
    }

    #[test]
    fn float_solver_agrees_with_exact() {
        let (p, q) = unbounded_pair(a(3), 3).unwrap();
        let ex =
            effective_resistance(a(3), &p, &q, SolverChoice::Exact, ExecMode::Sequential).unwrap();
        let fl =
            effective_resistance(a(3), &p, &q, SolverChoice::Float, ExecMode::Parallel).unwrap();
        assert!((ex.min_energy_f64() - fl.min_energy_f64()).abs() < 1e-12);
        assert!(!fl.is_exact());
    }

    #[test]
    fn pair_examples() {
        let (p, q) = unbounded_pair(a(3), 2).unwrap();
        assert_eq!(
            (p.to_string(), q.to_string()),
            ("12~1".into(), "21~2".into())
        );
        let (p, q) = unbounded_pair(a(4), 1).unwrap();
        assert!(is_unbounded_pair(&p, &q, 1));
        let (p, q) = unbounded_pair(a(2), 3).unwrap();
        assert_eq!(
            (p.to_string(), q.to_string()),
            ("121~2".into(), "212~1".into())
        );
        assert!(unbounded_pair(a(2), 0).is_err());
    }

    #[test]
    fn default_increments_are_admissible() {
        for (n, m) in [(3, 2), (3, 3), (3, 6), (2, 2), (5, 4)] {
            let d = default_increments(a(n), m).unwrap();
            assert!(d.is_positive() && d < increment_bound(a(n), m));
            assert!(int(2) * &d * &d < square_sum_bound(a(n), m));
        }
        assert!(default_increments(a(3), 1).is_err());
    }

    #[test]
    fn witness_schedule() {
        let d = ratio(1, 100);
        let w = resistance_witness(a(3), 2, &d, &d).unwrap();
        let levels = enumerate_level(a(3), 2).unwrap();
        let at = |s: &str| w.values.values()[levels.position(&pt(s)).unwrap()].clone();
        assert_eq!(at("12~1"), int(1));
        assert_eq!(at("21~2"), int(0));
        // a = (1 2 1̇): class [12] then [1]
        assert_eq!(at("12~3"), ratio(99, 100));
        assert_eq!(at("1~2"), ratio(98, 100));
        assert_eq!(at("1~3"), ratio(97, 100));
        assert_eq!(at("~1"), ratio(96, 100));
        assert_eq!(at("21~3"), ratio(1, 100));
        assert_eq!(at("~2"), ratio(4, 100));
        assert_eq!(at("~3"), ratio(95, 100));
        let (p, q) = unbounded_pair(a(3), 2).unwrap();
        let min = min_energy_with_constraints(a(3), 2, &[(p, int(1)), (q, int(0))]).unwrap();
        assert!(min.energy <= w.energy);
        assert!(resistance_witness(a(3), 2, &ratio(1, 4), &d).is_err());
    }
}
