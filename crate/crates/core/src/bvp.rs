//! The Dirichlet problem `Δu = f`, `u|_{V₀} = ζ`, solved by
//! `u = Σ_l ζ(l̇) 1_{[l]} - G_μ f`.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::ExecMode;
use crate::green::{green_operator_fast, laplacian_residual_on};
use crate::measure::{min_energy_extension, restrict, CylinderFunction, PointEvaluator};
use crate::numeric::{format_rational, parse_rational, Rational};
use crate::operators::DifferenceOperator;
use crate::shift::{Alphabet, Point};

/// `ζ(l̇)` for `l = 1..=N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryData {
    alphabet: Alphabet,
    values: Vec<Rational>,
}

impl BoundaryData {
    pub fn new(alphabet: Alphabet, values: Vec<Rational>) -> Result<Self> {
        if values.len() != alphabet.size() {
            return Err(Error::DimensionMismatch(format!(
                "boundary data over N={} needs {} values, got {}",
                alphabet.size(),
                alphabet.size(),
                values.len()
            )));
        }
        Ok(Self { alphabet, values })
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn to_file(&self) -> BoundaryFile {
        BoundaryFile {
            n: self.alphabet.size(),
            values: self.values.iter().map(format_rational).collect(),
        }
    }

    pub fn from_file(file: &BoundaryFile) -> Result<Self> {
        let values = file
            .values
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<_>>>()?;
        Self::new(Alphabet::new(file.n)?, values)
    }
}

/// On-disk form of boundary data: `{"N": 2, "values": ["0", "1"]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryFile {
    #[serde(rename = "N")]
    pub n: usize,
    pub values: Vec<String>,
}

/// `u = h - G_μ f` with `h` locally constant and `h(l̇) = ζ(l̇)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BvpSolution {
    harmonic: CylinderFunction,
    source: CylinderFunction,
}

impl BvpSolution {
    pub fn harmonic(&self) -> &CylinderFunction {
        &self.harmonic
    }

    pub fn source(&self) -> &CylinderFunction {
        &self.source
    }

    /// Level from which the interior identity holds exactly:
    /// `max(1, K_f - 1, K_h)` for coarsened depths of source and harmonic part.
    pub fn exact_from(&self) -> usize {
        let kf = self.source.coarsen().depth();
        let kh = self.harmonic.coarsen().depth();
        1.max(kf.saturating_sub(1)).max(kh)
    }

    /// The depth-`(m+1)` locally constant function agreeing with `u` on `V_m`.
    pub fn sample(&self, m: usize) -> Result<CylinderFunction> {
        let op = DifferenceOperator::new(self.alphabet(), m)?;
        let v = restrict(self, op.levels(), ExecMode::default());
        min_energy_extension(&v, op.levels())
    }
}

impl PointEvaluator for BvpSolution {
    fn alphabet(&self) -> Alphabet {
        self.harmonic.alphabet()
    }

    fn eval(&self, p: &Point) -> Rational {
        self.harmonic.evaluate(p) - green_operator_fast(&self.source, p)
    }
}

pub fn solve(f: &CylinderFunction, zeta: &BoundaryData) -> Result<BvpSolution> {
    if f.alphabet() != zeta.alphabet() {
        return Err(Error::AlphabetMismatch {
            expected: zeta.alphabet().size(),
            found: f.alphabet().size(),
        });
    }
    Ok(BvpSolution {
        harmonic: CylinderFunction::new(zeta.alphabet(), 1, zeta.values().to_vec())?,
        source: f.clone(),
    })
}

pub fn evaluate_solution(sol: &BvpSolution, p: &Point) -> Rational {
    sol.eval(p)
}

/// Adds a locally constant `h` vanishing on `V₀`.
pub fn add_harmonic_perturbation(sol: &BvpSolution, h: &CylinderFunction) -> Result<BvpSolution> {
    for l in h.alphabet().symbols() {
        let p = Point::fixed(l);
        if !h.evaluate(&p).is_zero() {
            return Err(Error::NonzeroOnBoundary {
                point: p.to_string(),
            });
        }
    }
    Ok(BvpSolution {
        harmonic: sol.harmonic.add(h)?,
        source: sol.source.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelCheck {
    pub m: usize,
    pub residual: String,
    /// Whether zero is required at this level.
    pub asserted: bool,
    pub passed: bool,
    pub worst_point: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub boundary_exact: bool,
    pub exact_from: usize,
    pub levels: Vec<LevelCheck>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.boundary_exact && self.levels.iter().all(|l| l.passed)
    }

    /// `(m, p)` of every asserted level with a nonzero residual.
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.boundary_exact {
            out.push("boundary values".to_string());
        }
        for l in self.levels.iter().filter(|l| !l.passed) {
            out.push(format!(
                "(m={}, p={})",
                l.m,
                l.worst_point.as_deref().unwrap_or("?")
            ));
        }
        out
    }
}

/// Checks the boundary values and `N^{m+1} (H_m u)(p) = f(p)` on every new
/// point of `V_m`, `1 ≤ m ≤ m_max`; levels below [`BvpSolution::exact_from`]
/// are reported only.
pub fn verify_solution(
    sol: &BvpSolution,
    zeta: &BoundaryData,
    m_max: usize,
    mode: ExecMode,
) -> Result<VerificationReport> {
    let boundary_exact = sol
        .alphabet()
        .symbols()
        .zip(zeta.values())
        .all(|(l, z)| &sol.eval(&Point::fixed(l)) == z);
    let exact_from = sol.exact_from();
    let mut levels = Vec::with_capacity(m_max);
    for m in 1..=m_max {
        let op = DifferenceOperator::new(sol.alphabet(), m)?;
        let r = laplacian_residual_on(&op, sol, &sol.source, mode)?;
        let asserted = m >= exact_from;
        levels.push(LevelCheck {
            m,
            residual: format_rational(&r.max),
            asserted,
            passed: !asserted || r.max.is_zero(),
            worst_point: r.worst.map(|p| p.to_string()),
        });
    }
    Ok(VerificationReport {
        boundary_exact,
        exact_from,
        levels,
    })
}
