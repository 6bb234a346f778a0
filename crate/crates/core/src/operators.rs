//! The difference operators `H_m`, their block split, the matrices `G_m`
//! and the Dirichlet forms.

use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::{map_indices, ExecMode};
use crate::measure::{LevelVector, PointEvaluator};
use crate::numeric::{int, inverse, rank, ratio, Rational, RationalMatrix};
use crate::report::CheckList;
use crate::sampling;
use crate::shift::{
    enumerate_level, neighbours, related, rho, Alphabet, LevelSet, Point, RhoValue,
};

/// Largest side length for which dense matrices are assembled.
pub const DENSE_CAP: u128 = 4096;

fn check_dense(alphabet: Alphabet, m: usize) -> Result<()> {
    let n = alphabet.pow(m + 1).unwrap_or(u128::MAX);
    if n > DENSE_CAP {
        return Err(Error::ResourceLimit {
            what: "dense operator",
            requested: n,
            cap: DENSE_CAP,
        });
    }
    Ok(())
}

/// `-(m-n+1)(N-1)` for a point of depth `n`.
fn diagonal(alphabet: Alphabet, depth: usize, m: usize) -> i64 {
    -(((m - depth + 1) * (alphabet.size() - 1)) as i64)
}

/// Matrix-free `H_m` on `V_m`: integer diagonal plus adjacency lists.
#[derive(Debug, Clone)]
pub struct DifferenceOperator {
    levels: Arc<LevelSet>,
    diag: Vec<i64>,
    adjacency: Vec<Vec<usize>>,
}

impl DifferenceOperator {
    pub fn new(alphabet: Alphabet, m: usize) -> Result<Self> {
        Ok(Self::from_levels(Arc::new(enumerate_level(alphabet, m)?)))
    }

    /// Accumulates the neighbour classes `𝒰_{p,i}` for `i = depth(p) ..= m`.
    pub fn from_levels(levels: Arc<LevelSet>) -> Self {
        let alphabet = levels.alphabet();
        let m = levels.level();
        let mut diag = Vec::with_capacity(levels.len());
        let mut adjacency = Vec::with_capacity(levels.len());
        for p in levels.points() {
            let mut nbrs = Vec::with_capacity((m - p.depth() + 1) * (alphabet.size() - 1));
            for i in p.depth()..=m {
                let head = p.first_symbols(i);
                for l in alphabet.symbols() {
                    let q = Point::new(head.clone(), l);
                    if &q != p {
                        nbrs.push(levels.position(&q).expect("class member lies in V_m"));
                    }
                }
            }
            nbrs.sort_unstable();
            diag.push(diagonal(alphabet, p.depth(), m));
            adjacency.push(nbrs);
        }
        Self {
            levels,
            diag,
            adjacency,
        }
    }

    pub fn levels(&self) -> &LevelSet {
        &self.levels
    }

    pub fn shared_levels(&self) -> Arc<LevelSet> {
        Arc::clone(&self.levels)
    }

    pub fn alphabet(&self) -> Alphabet {
        self.levels.alphabet()
    }

    pub fn level(&self) -> usize {
        self.levels.level()
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn diagonal(&self, i: usize) -> i64 {
        self.diag[i]
    }

    /// Indices `j` with `(H_m)_{ij} = 1`.
    pub fn neighbours(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    fn check_vector(&self, u: &LevelVector) -> Result<()> {
        if u.alphabet() != self.alphabet() {
            return Err(Error::AlphabetMismatch {
                expected: self.alphabet().size(),
                found: u.alphabet().size(),
            });
        }
        if u.level() != self.level() {
            return Err(Error::LevelMismatch {
                expected: self.level(),
                found: u.level(),
            });
        }
        Ok(())
    }

    /// `(H_m u)(i)` for one index.
    pub fn apply_at(&self, u: &[Rational], i: usize) -> Rational {
        let mut acc = &u[i] * int(self.diag[i]);
        for &j in &self.adjacency[i] {
            acc += &u[j];
        }
        acc
    }

    pub fn apply_values(&self, u: &[Rational], mode: ExecMode) -> Vec<Rational> {
        map_indices(mode, self.len(), |i| self.apply_at(u, i))
    }

    pub fn apply(&self, u: &LevelVector, mode: ExecMode) -> Result<LevelVector> {
        self.check_vector(u)?;
        LevelVector::new(
            self.alphabet(),
            self.level(),
            self.apply_values(u.values(), mode),
        )
    }

    /// Dense form assembled from the adjacency lists.
    pub fn to_dense(&self) -> Result<RationalMatrix> {
        check_dense(self.alphabet(), self.level())?;
        let n = self.len();
        let mut h = RationalMatrix::zeros(n, n);
        for i in 0..n {
            h.set(i, i, int(self.diag[i]));
            for &j in &self.adjacency[i] {
                h.set(i, j, Rational::one());
            }
        }
        Ok(h)
    }

    /// Row-major `f64` copy for the floating-point solver.
    pub fn to_f64_dense(&self) -> Vec<f64> {
        let n = self.len();
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            a[i * n + i] = self.diag[i] as f64;
            for &j in &self.adjacency[i] {
                a[i * n + j] = 1.0;
            }
        }
        a
    }

    /// `𝔈(u, v) = -⟨u, H_m v⟩`.
    pub fn dirichlet_form(&self, u: &LevelVector, v: &LevelVector) -> Result<Rational> {
        self.check_vector(u)?;
        self.check_vector(v)?;
        Ok(self.form_values(u.values(), v.values()))
    }

    pub fn form_values(&self, u: &[Rational], v: &[Rational]) -> Rational {
        let mut acc = Rational::zero();
        for (i, ui) in u.iter().enumerate().take(self.len()) {
            acc -= ui * self.apply_at(v, i);
        }
        acc
    }

    pub fn energy(&self, u: &LevelVector) -> Result<Rational> {
        self.dirichlet_form(u, u)
    }

    /// `½ Σ_{p,q} (H_m)_{pq} (u(p)-u(q)) (v(p)-v(q))`, summed once per edge.
    pub fn pairwise_form(&self, u: &LevelVector, v: &LevelVector) -> Result<Rational> {
        self.check_vector(u)?;
        self.check_vector(v)?;
        Ok(self.pairwise_values(u.values(), v.values()))
    }

    pub fn pairwise_values(&self, u: &[Rational], v: &[Rational]) -> Rational {
        let mut acc = Rational::zero();
        for (i, nbrs) in self.adjacency.iter().enumerate() {
            for &j in nbrs.iter().filter(|&&j| j > i) {
                acc += (&u[i] - &u[j]) * (&v[i] - &v[j]);
            }
        }
        acc
    }
}

/// `H_m u` for a level vector, building the operator on the fly.
pub fn apply_h(u: &LevelVector, mode: ExecMode) -> Result<LevelVector> {
    DifferenceOperator::new(u.alphabet(), u.level())?.apply(u, mode)
}

/// `(H_m u)(p)` from the values of `u` at `p` and its neighbours only.
pub fn apply_at_point(u: &dyn PointEvaluator, p: &Point, m: usize) -> Result<Rational> {
    let alphabet = u.alphabet();
    alphabet.check_point(p)?;
    if p.depth() > m {
        return Err(Error::DepthExceedsLevel {
            point: p.to_string(),
            depth: p.depth(),
            level: m,
        });
    }
    let mut acc = u.eval(p) * int(diagonal(alphabet, p.depth(), m));
    for i in p.depth()..=m {
        for q in neighbours(alphabet, p, i)? {
            acc += u.eval(&q);
        }
    }
    Ok(acc)
}

/// `(H_m)_{pq}` characterized directly: off the diagonal, 1 exactly when
/// both depths are at most `min(ρ(p,q) - 1, m)`.
pub fn h_entry(alphabet: Alphabet, p: &Point, q: &Point, m: usize) -> i64 {
    if p == q {
        return diagonal(alphabet, p.depth(), m);
    }
    let reach = match rho(p, q) {
        RhoValue::Finite(r) => (r - 1).min(m),
        RhoValue::Infinite => m,
    };
    i64::from(p.depth().max(q.depth()) <= reach)
}

/// Dense `H_m` in `≺` order from [`h_entry`], independent of the
/// neighbour-class construction.
pub fn build_dense_h(alphabet: Alphabet, m: usize, mode: ExecMode) -> Result<RationalMatrix> {
    check_dense(alphabet, m)?;
    let levels = enumerate_level(alphabet, m)?;
    dense_from_levels(&levels, mode)
}

fn dense_from_levels(levels: &LevelSet, mode: ExecMode) -> Result<RationalMatrix> {
    let (alphabet, m) = (levels.alphabet(), levels.level());
    let pts = levels.points();
    let rows = map_indices(mode, pts.len(), |i| {
        pts.iter()
            .map(|q| int(h_entry(alphabet, &pts[i], q, m)))
            .collect::<Vec<_>>()
    });
    RationalMatrix::from_rows(rows)
}

/// `H_m = [[T, Jᵀ], [J, X]]`, split at `V_{m-1} | V_m \ V_{m-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockDecomposition {
    pub t: RationalMatrix,
    pub j: RationalMatrix,
    pub x: RationalMatrix,
}

impl BlockDecomposition {
    pub fn from_dense(h: &RationalMatrix, split: usize) -> Result<Self> {
        let n = h.rows();
        if !h.is_square() || split == 0 || split >= n {
            return Err(Error::DimensionMismatch(format!(
                "cannot split a {}x{} matrix at {split}",
                h.rows(),
                h.cols()
            )));
        }
        let old: Vec<usize> = (0..split).collect();
        let new: Vec<usize> = (split..n).collect();
        Ok(Self {
            t: h.submatrix(&old, &old),
            j: h.submatrix(&new, &old),
            x: h.submatrix(&new, &new),
        })
    }

    pub fn reassemble(&self) -> RationalMatrix {
        let (a, b) = (self.t.rows(), self.x.rows());
        let mut h = RationalMatrix::zeros(a + b, a + b);
        for r in 0..a + b {
            for c in 0..a + b {
                let v = match (r < a, c < a) {
                    (true, true) => self.t.get(r, c),
                    (true, false) => self.j.get(c - a, r),
                    (false, true) => self.j.get(r - a, c),
                    (false, false) => self.x.get(r - a, c - a),
                };
                if !v.is_zero() {
                    h.set(r, c, v.clone());
                }
            }
        }
        h
    }
}

pub fn blocks(alphabet: Alphabet, m: usize, mode: ExecMode) -> Result<BlockDecomposition> {
    if m == 0 {
        return Err(Error::LevelTooSmall { min: 1, got: 0 });
    }
    let h = build_dense_h(alphabet, m, mode)?;
    BlockDecomposition::from_dense(&h, alphabet.size().pow(m as u32))
}

/// Entry of `T_m` from its own case table: `-(m-n+1)(N-1)` on the
/// diagonal, 1 when `q ∈ 𝒰_{p,i}` for some `depth(p) ≤ i < m`.
pub fn t_entry(alphabet: Alphabet, p: &Point, q: &Point, m: usize) -> i64 {
    if p == q {
        return diagonal(alphabet, p.depth(), m);
    }
    let hit = (p.depth()..m).any(|i| q.depth() <= i && p.first_symbols(i) == q.first_symbols(i));
    i64::from(hit)
}

/// `G_m` over `V_m \ V_{m-1}` in `≺` order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GreenMatrix {
    pub level: usize,
    pub matrix: RationalMatrix,
}

/// `(G_m)_{rs}` for `r, s ∈ V_m \ V_{m-1}`: `2/N` if equal, `1/N` if
/// `m`-related, otherwise 0.
pub fn green_matrix_entry(alphabet: Alphabet, r: &Point, s: &Point, m: usize) -> Rational {
    let n = alphabet.size() as i64;
    if r == s {
        ratio(2, n)
    } else if related(r, s, m) {
        ratio(1, n)
    } else {
        Rational::zero()
    }
}

pub fn green_matrix(alphabet: Alphabet, m: usize) -> Result<GreenMatrix> {
    if m == 0 {
        return Err(Error::LevelTooSmall { min: 1, got: 0 });
    }
    check_dense(alphabet, m)?;
    let levels = enumerate_level(alphabet, m)?;
    let fresh = levels.new_points();
    let mut g = RationalMatrix::zeros(fresh.len(), fresh.len());
    for (i, r) in fresh.iter().enumerate() {
        for (j, s) in fresh.iter().enumerate() {
            let v = green_matrix_entry(alphabet, r, s, m);
            if !v.is_zero() {
                g.set(i, j, v);
            }
        }
    }
    Ok(GreenMatrix {
        level: m,
        matrix: g,
    })
}

/// Clamps every value into `[0, 1]`.
pub fn unit_clamp(u: &LevelVector) -> LevelVector {
    let (zero, one) = (Rational::zero(), Rational::one());
    let values = u
        .values()
        .iter()
        .map(|v| {
            if v >= &one {
                one.clone()
            } else if v <= &zero {
                zero.clone()
            } else {
                v.clone()
            }
        })
        .collect();
    LevelVector::new(u.alphabet(), u.level(), values).expect("same shape")
}

/// Result of [`structural_check`].
#[derive(Debug, Clone, Serialize)]
pub struct StructuralReport {
    #[serde(rename = "N")]
    pub n: usize,
    pub m: usize,
    pub size: usize,
    pub rank: usize,
    pub checks: CheckList,
}

impl StructuralReport {
    pub fn passed(&self) -> bool {
        self.checks.all_passed()
    }

    /// `(m, property)` labels of every failed check.
    pub fn failures(&self) -> Vec<String> {
        self.checks
            .failures()
            .iter()
            .map(|c| format!("(m={}, {})", self.m, c.property))
            .collect()
    }
}

pub const FORM_SAMPLES: usize = 200;
const T_TABLE_SAMPLES: usize = 400;

/// Verifies the operator identities at level `m`: symmetry, zero row sums,
/// unit off-diagonals, rank `N^{m+1}-1` with constant kernel, sampled
/// positivity of the form, agreement of the two constructions and, for
/// `m ≥ 1`, the block identities.
pub fn structural_check(
    alphabet: Alphabet,
    m: usize,
    seed: u64,
    mode: ExecMode,
) -> Result<StructuralReport> {
    check_dense(alphabet, m)?;
    let op = DifferenceOperator::new(alphabet, m)?;
    let h = dense_from_levels(op.levels(), mode)?;
    let (mut checks, rank) = operator_checks(&op, &h, seed)?;
    if m >= 1 {
        checks.extend(block_identity_checks(&op, &h, seed, mode)?);
    }
    Ok(StructuralReport {
        n: alphabet.size(),
        m,
        size: h.rows(),
        rank,
        checks,
    })
}

/// Dense `H_m` for an existing operator, via [`h_entry`].
pub fn dense_for(op: &DifferenceOperator, mode: ExecMode) -> Result<RationalMatrix> {
    check_dense(op.alphabet(), op.level())?;
    dense_from_levels(op.levels(), mode)
}

/// Symmetry, row sums, entry pattern, rank, kernel and sampled positivity
/// of the dense `h`; returns the checks and the rank.
pub fn operator_checks(
    op: &DifferenceOperator,
    h: &RationalMatrix,
    seed: u64,
) -> Result<(CheckList, usize)> {
    let alphabet = op.alphabet();
    let m = op.level();
    let n = h.rows();
    let mut checks = CheckList::new();

    checks.push("symmetric", h.is_symmetric(), "");
    let bad_row = (0..n).find(|&i| !h.row(i).iter().sum::<Rational>().is_zero());
    checks.push(
        "zero row sums",
        bad_row.is_none(),
        bad_row.map(|i| format!("row {i}")).unwrap_or_default(),
    );
    let one = Rational::one();
    let bad_entry = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .find(|&(i, j)| i != j && !(h.get(i, j).is_zero() || h.get(i, j) == &one));
    checks.push(
        "off-diagonal entries in {0,1}",
        bad_entry.is_none(),
        bad_entry
            .map(|(i, j)| format!("entry ({i},{j})"))
            .unwrap_or_default(),
    );
    checks.push(
        "neighbour classes match dense characterization",
        &op.to_dense()? == h,
        "",
    );

    let r = rank(h);
    checks.push("rank N^(m+1)-1", r + 1 == n, format!("rank {r} of {n}"));
    let ones = vec![Rational::one(); n];
    let annihilates = h.mul_vec(&ones)?.iter().all(Zero::is_zero);
    checks.push(
        "kernel is the constants",
        annihilates && r + 1 == n,
        "H 1 = 0 and one-dimensional kernel",
    );

    let mut rng = sampling::sub_rng(seed, &[alphabet.size() as u64, m as u64, 1]);
    let mut worst: Option<usize> = None;
    for s in 0..FORM_SAMPLES {
        let u: Vec<Rational> = (0..n).map(|_| sampling::rational(&mut rng)).collect();
        let e = op.form_values(&u, &u);
        let constant = u.iter().all(|x| x == &u[0]);
        if e.is_negative() || (e.is_zero() && !constant) {
            worst = Some(s);
            break;
        }
    }
    checks.push(
        "form positive on sampled non-constant vectors",
        worst.is_none(),
        worst
            .map(|s| format!("sample {s}"))
            .unwrap_or(format!("{FORM_SAMPLES} samples")),
    );
    Ok((checks, r))
}

/// Block split, `X·(-G) = I`, the Schur relation for `T` and the `T`
/// entry table; requires `m ≥ 1`.
pub fn block_identity_checks(
    op: &DifferenceOperator,
    h: &RationalMatrix,
    seed: u64,
    mode: ExecMode,
) -> Result<CheckList> {
    if op.level() == 0 {
        return Err(Error::LevelTooSmall { min: 1, got: 0 });
    }
    let mut checks = CheckList::new();
    let alphabet = op.alphabet();
    let m = op.level();
    let split = alphabet.size().pow(m as u32);
    let b = BlockDecomposition::from_dense(h, split)?;
    checks.push("blocks reassemble", &b.reassemble() == h, "");

    let nm1 = alphabet.size() as i64 - 1;
    let fresh = op.levels().new_points();
    let x_ok = (0..b.x.rows()).all(|i| {
        (0..b.x.cols()).all(|j| {
            let want = if i == j {
                int(-nm1)
            } else if related(&fresh[i], &fresh[j], m) {
                Rational::one()
            } else {
                Rational::zero()
            };
            b.x.get(i, j) == &want
        })
    });
    checks.push("X has diagonal -(N-1) and unit class entries", x_ok, "");

    let g = green_matrix(alphabet, m)?;
    let prod = b.x.matmul_with(&g.matrix.scale(&int(-1)), mode)?;
    checks.push(
        "X times -G is the identity",
        prod == RationalMatrix::identity(b.x.rows()),
        "",
    );

    let x_inv = inverse(&b.x)?;
    let schur =
        b.j.transpose()
            .matmul_with(&x_inv.matmul_with(&b.j, mode)?, mode)?;
    let h_prev = dense_from_levels(&enumerate_level(alphabet, m - 1)?, mode)?;
    checks.push("T = H_(m-1) + J^T X^-1 J", h_prev.add(&schur)? == b.t, "");

    let prev_pts = &op.levels().points()[..split];
    let mut rng = sampling::sub_rng(seed, &[alphabet.size() as u64, m as u64, 2]);
    let mut samples: Vec<(usize, usize)> = (0..split).map(|i| (i, i)).collect();
    samples
        .extend((0..T_TABLE_SAMPLES).map(|_| (rng.gen_range(0..split), rng.gen_range(0..split))));
    // include every nonzero off-diagonal entry so the sample is not all zeros
    for i in 0..split {
        samples.extend(
            op.neighbours(i)
                .iter()
                .filter(|&&j| j < split)
                .map(|&j| (i, j)),
        );
    }
    let bad = samples
        .iter()
        .find(|&&(i, j)| b.t.get(i, j) != &int(t_entry(alphabet, &prev_pts[i], &prev_pts[j], m)));
    checks.push(
        "T agrees with its entry table",
        bad.is_none(),
        bad.map(|(i, j)| format!("entry ({i},{j})"))
            .unwrap_or(format!("{} entries", samples.len())),
    );
    Ok(checks)
}
