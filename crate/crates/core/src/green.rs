//! Green's function, the Green operator and Laplacian residuals.
//!
//! For an eventually constant `x` and `m ≥ 1`, the only `r ∈ V_m \ V_{m-1}`
//! whose cylinder `[r_1 … r_{m+1}]` contains `x` is `(x_1 … x_m ẋ_{m+1})`,
//! and it is new exactly when `x_m ≠ x_{m+1}`. Every formula below rests on
//! that observation.

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::{map_indices, map_slice, ExecMode};
use crate::measure::{restrict, CylinderFunction, LevelVector, PointEvaluator};
use crate::numeric::{format_rational, int, ratio, Rational};
use crate::operators::{apply_at_point, green_matrix_entry, DifferenceOperator};
use crate::shift::{enumerate_level, rho, Alphabet, LevelSet, Point, RhoValue};

/// A value of `g`, which is infinite only on the diagonal off `V_*`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GreenValue {
    Finite(Rational),
    Infinite,
}

impl GreenValue {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            GreenValue::Finite(v) => Some(v),
            GreenValue::Infinite => None,
        }
    }

    pub fn to_text(&self) -> String {
        match self {
            GreenValue::Finite(v) => format_rational(v),
            GreenValue::Infinite => "inf".to_string(),
        }
    }
}

/// `(x_1 … x_m ẋ_{m+1})` when it lies in `V_m \ V_{m-1}`.
fn new_truncation(x: &Point, m: usize) -> Option<Point> {
    (x.symbol(m) != x.symbol(m + 1)).then(|| x.truncate(m))
}

/// Last level that can contribute to `g(x, y)`.
fn last_level(x: &Point, y: &Point) -> usize {
    let deepest = x.depth().max(y.depth());
    match rho(x, y) {
        RhoValue::Finite(r) => (r - 1).min(deepest),
        RhoValue::Infinite => deepest,
    }
}

/// `g(x,y) = Σ_{m≥1} Σ_{r,s} (G_m)_{rs} χ_r^m(x) χ_s^m(y)`, summed term by
/// term with the entries of `G_m`.
pub fn green_function(alphabet: Alphabet, x: &Point, y: &Point) -> GreenValue {
    let mut acc = Rational::zero();
    for m in 1..=last_level(x, y) {
        if let (Some(r), Some(s)) = (new_truncation(x, m), new_truncation(y, m)) {
            acc += green_matrix_entry(alphabet, &r, &s, m);
        }
    }
    GreenValue::Finite(acc)
}

/// Closed form: `(2·#{1 ≤ m ≤ ρ-2 : x_m ≠ x_{m+1}} + [x_{ρ-1} ≠ x_ρ ∧ y_{ρ-1} ≠ y_ρ]) / N`.
pub fn green_function_fast(alphabet: Alphabet, x: &Point, y: &Point) -> GreenValue {
    let n = alphabet.size() as i64;
    let jumps = |upto: usize| {
        (1..=upto)
            .filter(|&m| x.symbol(m) != x.symbol(m + 1))
            .count() as i64
    };
    let value = match rho(x, y) {
        RhoValue::Infinite => 2 * jumps(x.depth()),
        RhoValue::Finite(1) => 0,
        RhoValue::Finite(r) => {
            let last = x.symbol(r - 1) != x.symbol(r) && y.symbol(r - 1) != y.symbol(r);
            2 * jumps(r - 2) + i64::from(last)
        }
    };
    GreenValue::Finite(ratio(value, n))
}

/// `g(p, ·)` as a cylinder function of depth `depth(p) + 1`.
pub fn green_section(alphabet: Alphabet, p: &Point) -> Result<CylinderFunction> {
    alphabet.check_point(p)?;
    let d = p.depth();
    CylinderFunction::from_cells(alphabet, d + 1, ExecMode::Sequential, |w| {
        let y = Point::new(w[..d].to_vec(), w[d]);
        match green_function_fast(alphabet, p, &y) {
            GreenValue::Finite(v) => v,
            GreenValue::Infinite => unreachable!("points of V_* have finite values"),
        }
    })
}

/// `G_μ f(p) = ∫ g(p,y) f(y) dμ(y)`, integrating the section against `f`.
pub fn green_operator(f: &CylinderFunction, p: &Point) -> Result<Rational> {
    Ok(green_section(f.alphabet(), p)?.mul(f)?.integrate())
}

/// `G_μ f(p)` from cylinder integrals of `f`: at each level `m` with a new
/// truncation `r`, `2/N ∫_{[p_1…p_{m+1}]} f + 1/N Σ_{l ∉ {p_m, p_{m+1}}} ∫_{[p_1…p_m l]} f`.
pub fn green_operator_fast(f: &CylinderFunction, p: &Point) -> Rational {
    let n = f.alphabet().size() as i64;
    let mut acc = Rational::zero();
    for m in 1..=p.depth() {
        let (pm, next) = (p.symbol(m), p.symbol(m + 1));
        if pm == next {
            continue;
        }
        let mut w = p.first_symbols(m + 1);
        acc += ratio(2, n) * f.integrate_over(&w);
        for l in f.alphabet().symbols().filter(|&l| l != pm && l != next) {
            w[m] = l;
            acc += ratio(1, n) * f.integrate_over(&w);
        }
    }
    acc
}

/// `G_μ f` as a point evaluator.
#[derive(Debug, Clone)]
pub struct GreenPotential {
    f: CylinderFunction,
}

impl GreenPotential {
    pub fn new(f: CylinderFunction) -> Self {
        Self { f }
    }

    pub fn source(&self) -> &CylinderFunction {
        &self.f
    }
}

impl PointEvaluator for GreenPotential {
    fn alphabet(&self) -> Alphabet {
        self.f.alphabet()
    }

    fn eval(&self, p: &Point) -> Rational {
        green_operator_fast(&self.f, p)
    }
}

/// `G_μ f` at every point of `V_m`, in `≺` order.
pub fn green_operator_level(
    f: &CylinderFunction,
    levels: &LevelSet,
    mode: ExecMode,
) -> LevelVector {
    let values = map_slice(mode, levels.points(), |p| green_operator_fast(f, p));
    LevelVector::new(levels.alphabet(), levels.level(), values).expect("one value per point")
}

pub fn green_operator_at_level(
    f: &CylinderFunction,
    m: usize,
    mode: ExecMode,
) -> Result<LevelVector> {
    Ok(green_operator_level(
        f,
        &enumerate_level(f.alphabet(), m)?,
        mode,
    ))
}

/// Largest deviation `|N^{m+1} (H_m u)(p) - f(p)|` over `p ∈ V_m \ V_{m-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Residual {
    pub level: usize,
    pub max: Rational,
    /// A point attaining `max`, when it is nonzero.
    pub worst: Option<Point>,
}

pub fn laplacian_residual(
    u: &dyn PointEvaluator,
    f: &dyn PointEvaluator,
    m: usize,
    mode: ExecMode,
) -> Result<Residual> {
    let op = DifferenceOperator::new(u.alphabet(), m)?;
    laplacian_residual_on(&op, u, f, mode)
}

pub fn laplacian_residual_on(
    op: &DifferenceOperator,
    u: &dyn PointEvaluator,
    f: &dyn PointEvaluator,
    mode: ExecMode,
) -> Result<Residual> {
    let m = op.level();
    if m == 0 {
        return Err(Error::LevelTooSmall { min: 1, got: 0 });
    }
    let scale = int(op.alphabet().size().pow(m as u32 + 1) as i64);
    let values = restrict(u, op.levels(), mode);
    let range = op.levels().new_range();
    let start = range.start;
    let devs = map_indices(mode, range.len(), |k| {
        let i = start + k;
        (&scale * op.apply_at(values.values(), i) - f.eval(op.levels().point(i))).abs()
    });
    let (mut max, mut worst) = (Rational::zero(), None);
    for (k, d) in devs.into_iter().enumerate() {
        if d > max {
            max = d;
            worst = Some(op.levels().point(start + k).clone());
        }
    }
    Ok(Residual {
        level: m,
        max,
        worst,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEntry {
    pub m: usize,
    pub point: Point,
    pub value: Rational,
}

/// `N^{m+1} (H_m u)(p^m)` with `p^m = (x_1 … x_m l̇)`, `l` the smallest
/// symbol different from `x_m`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LaplacianTrace {
    pub entries: Vec<TraceEntry>,
}

impl LaplacianTrace {
    /// `(m, value)` rows for CSV output.
    pub fn rows(&self) -> Vec<(usize, Rational)> {
        self.entries
            .iter()
            .map(|e| (e.m, e.value.clone()))
            .collect()
    }
}

pub fn trace_point(alphabet: Alphabet, x_prefix: &[u8], m: usize) -> Point {
    let xm = x_prefix[m - 1];
    let l = alphabet.symbols().find(|&l| l != xm).expect("N ≥ 2");
    Point::new(x_prefix[..m].to_vec(), l)
}

pub fn pointwise_laplacian_trace(
    u: &dyn PointEvaluator,
    x_prefix: &[u8],
    m_max: usize,
    mode: ExecMode,
) -> Result<LaplacianTrace> {
    let alphabet = u.alphabet();
    if x_prefix.len() < m_max {
        return Err(Error::PrefixTooShort {
            len: x_prefix.len(),
            m_max,
        });
    }
    for &s in x_prefix {
        alphabet.check_symbol(s as usize)?;
    }
    let entries = map_indices(mode, m_max, |k| {
        let m = k + 1;
        let p = trace_point(alphabet, x_prefix, m);
        let scale = int(alphabet.size().pow(m as u32 + 1) as i64);
        apply_at_point(u, &p, m).map(|h| TraceEntry {
            m,
            value: scale * h,
            point: p,
        })
    });
    Ok(LaplacianTrace {
        entries: entries.into_iter().collect::<Result<_>>()?,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundViolation {
    pub x: Point,
    pub y: Point,
    pub value: String,
    pub bound: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GreenBoundReport {
    #[serde(rename = "N")]
    pub n: usize,
    pub depth: usize,
    pub pairs: usize,
    /// Distinct pairs with `ρ ≥ 2` attaining the bound.
    pub equality_pairs: usize,
    pub violations: Vec<BoundViolation>,
}

impl GreenBoundReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `0 ≤ g(x,y) ≤ |2ρ(x,y) - 3| / N` over all ordered pairs of
/// distinct points of `V_depth`.
pub fn check_green_bound(
    alphabet: Alphabet,
    depth: usize,
    mode: ExecMode,
) -> Result<GreenBoundReport> {
    let levels = enumerate_level(alphabet, depth)?;
    let pts = levels.points();
    let n = alphabet.size() as i64;
    let rows = map_indices(mode, pts.len(), |i| {
        let mut eq = 0;
        let mut bad = Vec::new();
        for (j, y) in pts.iter().enumerate() {
            let x = &pts[i];
            let RhoValue::Finite(r) = rho(x, y) else {
                debug_assert_eq!(i, j);
                continue;
            };
            let g = match green_function(alphabet, x, y) {
                GreenValue::Finite(v) => v,
                GreenValue::Infinite => unreachable!("finite on V_*"),
            };
            let bound = ratio((2 * r as i64 - 3).abs(), n);
            if g.is_negative() || g > bound {
                bad.push(BoundViolation {
                    x: x.clone(),
                    y: y.clone(),
                    value: format_rational(&g),
                    bound: format_rational(&bound),
                });
            } else if r >= 2 && g == bound {
                eq += 1;
            }
        }
        (eq, bad)
    });
    let mut report = GreenBoundReport {
        n: alphabet.size(),
        depth,
        pairs: pts.len() * pts.len().saturating_sub(1),
        equality_pairs: 0,
        violations: Vec::new(),
    };
    for (eq, bad) in rows {
        report.equality_pairs += eq;
        report.violations.extend(bad);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::indicator;
    use crate::sampling;

    fn a(n: usize) -> Alphabet {
        Alphabet::new(n).unwrap()
    }

    fn pt(s: &str) -> Point {
        s.parse().unwrap()
    }

    fn g(n: usize, x: &str, y: &str) -> Rational {
        green_function(a(n), &pt(x), &pt(y))
            .finite()
            .unwrap()
            .clone()
    }

    #[test]
    fn green_function_examples() {
        assert_eq!(g(3, "12~1", "23~1"), int(0));
        assert_eq!(g(3, "~2", "12~3"), int(0));
        assert_eq!(g(3, "12~3", "~2"), int(0));
        assert_eq!(g(3, "1~2", "1~3"), ratio(1, 3));
        // ρ = 2 with both first symbols changing
        assert_eq!(g(4, "1~2", "13~1"), ratio(1, 4));
        // constant up to ρ
        assert_eq!(g(3, "11~2", "12~3"), int(0));
    }

    #[test]
    fn fast_matches_definition() {
        let mut rng = sampling::rng(17);
        for n in [2, 3, 4] {
            for _ in 0..2000 {
                let x = sampling::point(&mut rng, a(n), 6);
                // share a random-length prefix so that ρ varies
                let k = rand::Rng::gen_range(&mut rng, 0..=x.depth() + 1);
                let tail = sampling::point(&mut rng, a(n), 5);
                let mut w = x.first_symbols(k);
                w.extend(tail.prefix());
                let y = Point::new(w, tail.tail());
                assert_eq!(
                    green_function(a(n), &x, &y),
                    green_function_fast(a(n), &x, &y),
                    "{x} {y}"
                );
                assert_eq!(green_function(a(n), &x, &y), green_function(a(n), &y, &x));
            }
        }
    }

    #[test]
    fn section_examples() {
        let s = green_section(a(3), &pt("~1")).unwrap();
        assert!(s.values().iter().all(Zero::is_zero));
        let s = green_section(a(2), &pt("2~1")).unwrap();
        assert_eq!(s, indicator(a(2), &pt("2~1"), 1).unwrap());
        let mut rng = sampling::rng(3);
        for _ in 0..200 {
            let p = sampling::point(&mut rng, a(3), 4);
            let y = sampling::point(&mut rng, a(3), 6);
            let s = green_section(a(3), &p).unwrap();
            assert_eq!(
                &s.evaluate(&y),
                green_function(a(3), &p, &y).finite().unwrap()
            );
        }
    }

    #[test]
    fn operator_examples() {
        let one = CylinderFunction::constant(a(2), int(1));
        assert_eq!(green_operator(&one, &pt("2~1")).unwrap(), ratio(1, 4));
        let mut rng = sampling::rng(4);
        let f = sampling::cylinder_function(&mut rng, a(3), 2).unwrap();
        let h = sampling::cylinder_function(&mut rng, a(3), 3).unwrap();
        for l in 1..=3 {
            assert!(green_operator(&f, &Point::fixed(l)).unwrap().is_zero());
        }
        let (al, be) = (ratio(2, 3), ratio(-5, 2));
        let comb = f.scale(&al).add(&h.scale(&be)).unwrap();
        for _ in 0..50 {
            let p = sampling::point(&mut rng, a(3), 4);
            let lhs = green_operator(&comb, &p).unwrap();
            let rhs = &al * green_operator(&f, &p).unwrap() + &be * green_operator(&h, &p).unwrap();
            assert_eq!(lhs, rhs);
            assert_eq!(green_operator_fast(&f, &p), green_operator(&f, &p).unwrap());
        }
    }

    #[test]
    fn level_examples() {
        let one = CylinderFunction::constant(a(2), int(1));
        let v = green_operator_at_level(&one, 1, ExecMode::Parallel).unwrap();
        assert_eq!(v.values(), &[int(0), int(0), ratio(1, 4), ratio(1, 4)]);
        let zero = CylinderFunction::constant(a(3), int(0));
        let v = green_operator_at_level(&zero, 2, ExecMode::Sequential).unwrap();
        assert!(v.values().iter().all(Zero::is_zero));
        let mut rng = sampling::rng(8);
        let f = sampling::cylinder_function(&mut rng, a(3), 2).unwrap();
        let v = green_operator_at_level(&f, 3, ExecMode::Parallel).unwrap();
        assert!(v.values()[..3].iter().all(Zero::is_zero));
    }

    #[test]
    fn residual_examples() {
        let one = CylinderFunction::constant(a(3), int(1));
        let u = GreenPotential::new(one);
        let minus_one = CylinderFunction::constant(a(3), int(-1));
        for m in 1..=4 {
            let r = laplacian_residual(&u, &minus_one, m, ExecMode::Parallel).unwrap();
            assert!(r.max.is_zero());
        }
        let c = CylinderFunction::constant(a(2), ratio(3, 7));
        let z = CylinderFunction::constant(a(2), int(0));
        assert!(laplacian_residual(&c, &z, 3, ExecMode::Sequential)
            .unwrap()
            .max
            .is_zero());
        assert!(laplacian_residual(&c, &z, 0, ExecMode::Sequential).is_err());
    }

    #[test]
    fn cylinder_functions_are_harmonic_from_their_depth() {
        let mut rng = sampling::rng(11);
        for k in 1..=3 {
            let u = sampling::cylinder_function(&mut rng, a(3), k).unwrap();
            let z = CylinderFunction::constant(a(3), int(0));
            for m in k.max(1)..=4 {
                assert!(laplacian_residual(&u, &z, m, ExecMode::Parallel)
                    .unwrap()
                    .max
                    .is_zero());
            }
        }
        // one level earlier is not enough: 1 on [21] over two symbols
        let u = indicator(a(2), &pt("2~1"), 1).unwrap();
        let z = CylinderFunction::constant(a(2), int(0));
        let r = laplacian_residual(&u, &z, 1, ExecMode::Sequential).unwrap();
        assert_eq!(r.max, int(4));
    }

    #[test]
    fn trace_examples() {
        let u = GreenPotential::new(CylinderFunction::constant(a(2), int(1)));
        let t = pointwise_laplacian_trace(&u, &[1, 2, 1, 2, 2, 1], 6, ExecMode::Parallel).unwrap();
        assert!(t.entries.iter().all(|e| e.value == int(-1)));
        assert_eq!(t.entries[0].point, pt("1~2"));
        assert_eq!(t.entries[1].point, pt("12~1"));
        let c = CylinderFunction::constant(a(3), int(2));
        let t = pointwise_laplacian_trace(&c, &[3, 3, 3], 3, ExecMode::Sequential).unwrap();
        assert!(t.entries.iter().all(|e| e.value.is_zero()));
        assert!(pointwise_laplacian_trace(&c, &[1, 2], 3, ExecMode::Sequential).is_err());
        for e in &t.entries {
            assert_eq!(e.point.depth(), e.m);
        }
    }

    #[test]
    fn bound_examples() {
        let r = check_green_bound(a(2), 4, ExecMode::Parallel).unwrap();
        assert!(r.passed());
        let r = check_green_bound(a(3), 3, ExecMode::Parallel).unwrap();
        assert!(r.passed());
        assert!(r.equality_pairs > 0);
        assert_eq!(g(3, "12~1", "12~3"), ratio(3, 3));
    }

    #[test]
    fn green_level_identity() {
        // H_n G_μ f (p) = -∫ χ_p^n f
        let mut rng = sampling::rng(21);
        for n in [2, 3] {
            let f = sampling::cylinder_function(&mut rng, a(n), 2).unwrap();
            let u = GreenPotential::new(f.clone());
            for m in 1..=3 {
                let op = DifferenceOperator::new(a(n), m).unwrap();
                let hv = op
                    .apply(
                        &restrict(&u, op.levels(), ExecMode::Parallel),
                        ExecMode::Parallel,
                    )
                    .unwrap();
                for i in op.levels().new_range() {
                    let p = op.levels().point(i);
                    let want = -indicator(a(n), p, m).unwrap().mul(&f).unwrap().integrate();
                    assert_eq!(hv.values()[i], want);
                }
            }
        }
    }
}
