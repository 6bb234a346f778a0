//! The equidistributed Bernoulli measure, locally constant (cylinder)
//! functions and functions on level sets.
//!
//! Cylinder cells of depth `K` are indexed in lexicographic word order;
//! [`LevelVector`] entries follow the `≺` order of `V_m`.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{map_indices, map_slice, ExecMode};
use crate::numeric::{format_rational, inv_pow, parse_rational, Rational};
use crate::shift::{enumerate_level, Alphabet, LevelSet, Point, Word};

/// `μ([w]) = N^{-|w|}`.
pub fn bernoulli_measure(alphabet: Alphabet, w: &Word) -> Rational {
    inv_pow(alphabet.size(), w.len())
}

/// A function `Point → ℚ`, total on eventually constant points.
pub trait PointEvaluator: Sync {
    fn alphabet(&self) -> Alphabet;
    fn eval(&self, p: &Point) -> Rational;

    /// Depth of a locally constant evaluator, if known.
    fn cylinder_depth(&self) -> Option<usize> {
        None
    }
}

/// Adapts a closure into a [`PointEvaluator`].
pub struct FnEvaluator<F> {
    alphabet: Alphabet,
    f: F,
}

impl<F> FnEvaluator<F>
where
    F: Fn(&Point) -> Rational + Sync,
{
    pub fn new(alphabet: Alphabet, f: F) -> Self {
        Self { alphabet, f }
    }
}

impl<F> PointEvaluator for FnEvaluator<F>
where
    F: Fn(&Point) -> Rational + Sync,
{
    fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    fn eval(&self, p: &Point) -> Rational {
        (self.f)(p)
    }
}

/// `u(x) = Σ_i x_i 2^{-i}`, a Lipschitz test function.
pub fn binary_expansion_evaluator(alphabet: Alphabet) -> impl PointEvaluator {
    FnEvaluator::new(alphabet, |p: &Point| {
        let mut acc = Rational::zero();
        for (i, &s) in p.prefix().iter().enumerate() {
            acc += Rational::from_integer(s.into()) * inv_pow(2, i + 1);
        }
        // the constant tail sums to tail * 2^{-depth}
        acc + Rational::from_integer(p.tail().into()) * inv_pow(2, p.depth())
    })
}

/// Locally constant function of depth `K`: one exact value per word of
/// length `K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CylinderFunction {
    alphabet: Alphabet,
    depth: usize,
    values: Vec<Rational>,
}

fn cell_count(alphabet: Alphabet, depth: usize) -> Result<usize> {
    let n = alphabet.pow(depth).unwrap_or(u128::MAX);
    if n > crate::shift::DEFAULT_POINT_CAP {
        return Err(Error::ResourceLimit {
            what: "cylinder function",
            requested: n,
            cap: crate::shift::DEFAULT_POINT_CAP,
        });
    }
    Ok(n as usize)
}

impl CylinderFunction {
    pub fn new(alphabet: Alphabet, depth: usize, values: Vec<Rational>) -> Result<Self> {
        let cells = cell_count(alphabet, depth)?;
        if values.len() != cells {
            return Err(Error::DimensionMismatch(format!(
                "depth {depth} over N={} needs {cells} values, got {}",
                alphabet.size(),
                values.len()
            )));
        }
        Ok(Self {
            alphabet,
            depth,
            values,
        })
    }

    pub fn constant(alphabet: Alphabet, c: Rational) -> Self {
        Self {
            alphabet,
            depth: 0,
            values: vec![c],
        }
    }

    /// Builds a depth-`K` function by evaluating `f` on every cell word.
    pub fn from_cells(
        alphabet: Alphabet,
        depth: usize,
        mode: ExecMode,
        f: impl Fn(&[u8]) -> Rational + Sync + Send,
    ) -> Result<Self> {
        let cells = cell_count(alphabet, depth)?;
        let values = map_indices(mode, cells, |i| f(&cell_word(alphabet, depth, i)));
        Ok(Self {
            alphabet,
            depth,
            values,
        })
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    /// Value on the cell `[w]`, `|w| = depth`.
    pub fn cell_value(&self, w: &[u8]) -> &Rational {
        &self.values[cell_index(self.alphabet, w)]
    }

    pub fn evaluate(&self, x: &Point) -> Rational {
        self.values[cell_index(self.alphabet, &x.first_symbols(self.depth))].clone()
    }

    pub fn refine(&self, depth: usize) -> Result<Self> {
        if depth < self.depth {
            return Err(Error::DepthDecrease {
                requested: depth,
                current: self.depth,
            });
        }
        let fan = cell_count(self.alphabet, depth - self.depth)?;
        let cells = cell_count(self.alphabet, depth)?;
        let values = (0..cells).map(|i| self.values[i / fan].clone()).collect();
        Ok(Self {
            alphabet: self.alphabet,
            depth,
            values,
        })
    }

    /// `∫ f dμ = Σ_w f(w) N^{-K}`.
    pub fn integrate(&self) -> Rational {
        let total: Rational = self.values.iter().sum();
        total * inv_pow(self.alphabet.size(), self.depth)
    }

    /// `∫_{[w]} f dμ` for any word `w`.
    pub fn integrate_over(&self, w: &[u8]) -> Rational {
        let n = self.alphabet.size();
        if w.len() >= self.depth {
            return self.cell_value(&w[..self.depth]).clone() * inv_pow(n, w.len());
        }
        let fan = n.pow((self.depth - w.len()) as u32);
        let start = cell_index(self.alphabet, w) * fan;
        let total: Rational = self.values[start..start + fan].iter().sum();
        total * inv_pow(n, self.depth)
    }

    fn zip_with(
        &self,
        other: &Self,
        op: impl Fn(&Rational, &Rational) -> Rational,
    ) -> Result<Self> {
        if self.alphabet != other.alphabet {
            return Err(Error::AlphabetMismatch {
                expected: self.alphabet.size(),
                found: other.alphabet.size(),
            });
        }
        let depth = self.depth.max(other.depth);
        let (a, b) = (self.refine(depth)?, other.refine(depth)?);
        Ok(Self {
            alphabet: self.alphabet,
            depth,
            values: a
                .values
                .iter()
                .zip(&b.values)
                .map(|(x, y)| op(x, y))
                .collect(),
        })
    }

    /// Pointwise product, refined to the larger depth.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn scale(&self, s: &Rational) -> Self {
        Self {
            alphabet: self.alphabet,
            depth: self.depth,
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }

    /// Drops redundant levels: the shallowest depth representing the same
    /// function.
    pub fn coarsen(&self) -> Self {
        let n = self.alphabet.size();
        let mut cur = self.clone();
        while cur.depth > 0 {
            let ok = cur.values.chunks(n).all(|c| c.iter().all(|v| v == &c[0]));
            if !ok {
                break;
            }
            cur = Self {
                alphabet: cur.alphabet,
                depth: cur.depth - 1,
                values: cur.values.chunks(n).map(|c| c[0].clone()).collect(),
            };
        }
        cur
    }

    pub fn to_file(&self) -> FunctionFile {
        FunctionFile {
            n: self.alphabet.size(),
            depth: self.depth,
            values: self.values.iter().map(format_rational).collect(),
        }
    }

    pub fn from_file(file: &FunctionFile) -> Result<Self> {
        let alphabet = Alphabet::new(file.n)?;
        let values = file
            .values
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<_>>>()?;
        Self::new(alphabet, file.depth, values)
    }
}

impl PointEvaluator for CylinderFunction {
    fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    fn eval(&self, p: &Point) -> Rational {
        self.evaluate(p)
    }

    fn cylinder_depth(&self) -> Option<usize> {
        Some(self.depth)
    }
}

/// Lexicographic index of a word.
pub fn cell_index(alphabet: Alphabet, w: &[u8]) -> usize {
    let n = alphabet.size();
    w.iter().fold(0, |acc, &s| acc * n + (s as usize - 1))
}

/// Inverse of [`cell_index`] for words of length `depth`.
pub fn cell_word(alphabet: Alphabet, depth: usize, mut idx: usize) -> Vec<u8> {
    let n = alphabet.size();
    let mut w = vec![0u8; depth];
    for slot in w.iter_mut().rev() {
        *slot = (idx % n) as u8 + 1;
        idx /= n;
    }
    w
}

/// On-disk form of a cylinder function.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionFile {
    #[serde(rename = "N")]
    pub n: usize,
    pub depth: usize,
    pub values: Vec<String>,
}

/// A function on `V_m`, indexed in `≺` order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelVector {
    alphabet: Alphabet,
    level: usize,
    values: Vec<Rational>,
}

impl LevelVector {
    pub fn new(alphabet: Alphabet, level: usize, values: Vec<Rational>) -> Result<Self> {
        let expected = alphabet.pow(level + 1).unwrap_or(u128::MAX);
        if values.len() as u128 != expected {
            return Err(Error::DimensionMismatch(format!(
                "level {level} over N={} needs {expected} values, got {}",
                alphabet.size(),
                values.len()
            )));
        }
        Ok(Self {
            alphabet,
            level,
            values,
        })
    }

    pub fn constant(alphabet: Alphabet, level: usize, c: Rational) -> Result<Self> {
        let len = alphabet.pow(level + 1).unwrap_or(u128::MAX) as usize;
        Self::new(alphabet, level, vec![c; len])
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Rational> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The first `N^{k+1}` entries, i.e. the restriction to `V_k`.
    pub fn truncate_level(&self, k: usize) -> Result<Self> {
        if k > self.level {
            return Err(Error::LevelMismatch {
                expected: self.level,
                found: k,
            });
        }
        let len = self.alphabet.size().pow(k as u32 + 1);
        Self::new(self.alphabet, k, self.values[..len].to_vec())
    }

    pub fn to_file(&self) -> LevelVectorFile {
        LevelVectorFile {
            n: self.alphabet.size(),
            level: self.level,
            values: self.values.iter().map(format_rational).collect(),
        }
    }

    pub fn from_file(file: &LevelVectorFile) -> Result<Self> {
        let alphabet = Alphabet::new(file.n)?;
        let values = file
            .values
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<_>>>()?;
        Self::new(alphabet, file.level, values)
    }
}

/// On-disk form of a level vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelVectorFile {
    #[serde(rename = "N")]
    pub n: usize,
    pub level: usize,
    pub values: Vec<String>,
}

/// `χ_p^m`: 1 on `[p_1 … p_{m+1}]`, 0 elsewhere.
pub fn indicator(alphabet: Alphabet, p: &Point, m: usize) -> Result<CylinderFunction> {
    alphabet.check_point(p)?;
    if p.depth() > m {
        return Err(Error::DepthExceedsLevel {
            point: p.to_string(),
            depth: p.depth(),
            level: m,
        });
    }
    let cells = cell_count(alphabet, m + 1)?;
    let mut values = vec![Rational::zero(); cells];
    values[cell_index(alphabet, &p.first_symbols(m + 1))] = Rational::one();
    CylinderFunction::new(alphabet, m + 1, values)
}

/// `u|_{V_m}` in `≺` order.
pub fn restrict(u: &dyn PointEvaluator, levels: &LevelSet, mode: ExecMode) -> LevelVector {
    let values = map_slice(mode, levels.points(), |p| u.eval(p));
    LevelVector {
        alphabet: levels.alphabet(),
        level: levels.level(),
        values,
    }
}

pub fn restrict_to_level(u: &dyn PointEvaluator, m: usize) -> Result<LevelVector> {
    let levels = enumerate_level(u.alphabet(), m)?;
    Ok(restrict(u, &levels, ExecMode::default()))
}

/// The energy-preserving extension of `v ∈ ℓ(V_m)`: constant on each
/// cylinder `[p_1 … p_{m+1}]`, equal to `v(p_1 … p_m ṗ_{m+1})`.
pub fn min_energy_extension(v: &LevelVector, levels: &LevelSet) -> Result<CylinderFunction> {
    if levels.level() != v.level() || levels.alphabet() != v.alphabet() {
        return Err(Error::LevelMismatch {
            expected: levels.level(),
            found: v.level(),
        });
    }
    let m = v.level();
    CylinderFunction::from_cells(v.alphabet(), m + 1, ExecMode::default(), |w| {
        let p = Point::new(w[..m].to_vec(), w[m]);
        let i = levels
            .position(&p)
            .expect("cell representative lies in V_m");
        v.values()[i].clone()
    })
}

/// `u_m = Σ_{p ∈ V_m} u(p) χ_p^m`: sampling of `u` on `V_m`, held constant
/// on cylinders of length `m+1`.
pub fn harmonic_approximation(u: &dyn PointEvaluator, m: usize) -> Result<CylinderFunction> {
    CylinderFunction::from_cells(u.alphabet(), m + 1, ExecMode::default(), |w| {
        u.eval(&Point::new(w[..m].to_vec(), w[m]))
    })
}
