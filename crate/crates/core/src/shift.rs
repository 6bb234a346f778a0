//! Eventually constant points of the one-sided full shift, the nested level
//! sets `V_m` with their canonical order, and the `m`-relation.
//!
//! A [`Point`] `(p_1 … p_d ṫ)` is stored as its shortest prefix plus the
//! repeating tail symbol, so `depth()` is the least `m` with the point in
//! `V_m`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numeric::{inv_pow, Rational};

/// Default cap on `N^{m+1}` for level enumeration.
pub const DEFAULT_POINT_CAP: u128 = 1_000_000;

/// Symbols are `1..=n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Alphabet {
    n: usize,
}

impl Alphabet {
    pub fn new(n: usize) -> Result<Self> {
        if !(2..=255).contains(&n) {
            return Err(Error::InvalidAlphabet(n));
        }
        Ok(Self { n })
    }

    pub fn size(self) -> usize {
        self.n
    }

    pub fn symbols(self) -> impl Iterator<Item = u8> {
        1..=self.n as u8
    }

    pub fn check_symbol(self, s: usize) -> Result<u8> {
        if s == 0 || s > self.n {
            return Err(Error::SymbolOutOfRange {
                symbol: s,
                n: self.n,
            });
        }
        Ok(s as u8)
    }

    pub fn check_point(self, p: &Point) -> Result<()> {
        for &s in p.prefix.iter().chain(std::iter::once(&p.tail)) {
            self.check_symbol(s as usize)?;
        }
        Ok(())
    }

    pub fn check_word(self, w: &Word) -> Result<()> {
        for &s in &w.0 {
            self.check_symbol(s as usize)?;
        }
        Ok(())
    }

    /// `N^k` as u128, or `None` on overflow.
    pub fn pow(self, k: usize) -> Option<u128> {
        (self.n as u128).checked_pow(k as u32)
    }

    /// Parses a point and checks it against this alphabet.
    pub fn parse_point(self, s: &str) -> Result<Point> {
        let p: Point = s.parse()?;
        self.check_point(&p)?;
        Ok(p)
    }
}

/// A finite word over the alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(pub Vec<u8>);

impl Word {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[u8] {
        &self.0
    }

    /// Parses `"1212"`, or `"10.3.2"` for multi-digit symbols.
    pub fn parse(s: &str) -> Result<Self> {
        parse_symbols(s).map(Word)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_symbols(&self.0))
    }
}

fn parse_symbols(s: &str) -> Result<Vec<u8>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    let parse_one = |t: &str| -> Result<u8> {
        t.parse::<u8>()
            .ok()
            .filter(|&v| v >= 1)
            .ok_or_else(|| Error::Parse(format!("bad symbol {t:?}")))
    };
    if s.contains('.') {
        s.split('.').map(parse_one).collect()
    } else {
        s.chars().map(|c| parse_one(&c.to_string())).collect()
    }
}

fn render_symbols(syms: &[u8]) -> String {
    if syms.iter().all(|&s| s <= 9) {
        syms.iter().map(|s| char::from(b'0' + s)).collect()
    } else {
        syms.iter().map(u8::to_string).collect::<Vec<_>>().join(".")
    }
}

/// An eventually constant sequence `(p_1 … p_d ṫ)` in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    prefix: Vec<u8>,
    tail: u8,
}

impl Point {
    /// Builds `(prefix ṫail)`, folding trailing repetitions of `tail`.
    pub fn new(mut prefix: Vec<u8>, tail: u8) -> Self {
        while prefix.last() == Some(&tail) {
            prefix.pop();
        }
        Self { prefix, tail }
    }

    /// The fixed point `(l̇)`.
    pub fn fixed(l: u8) -> Self {
        Self {
            prefix: Vec::new(),
            tail: l,
        }
    }

    pub fn prefix(&self) -> &[u8] {
        &self.prefix
    }

    pub fn tail(&self) -> u8 {
        self.tail
    }

    /// Least `m` with the point in `V_m`.
    pub fn depth(&self) -> usize {
        self.prefix.len()
    }

    /// Coordinate `x_i`, 1-based.
    pub fn symbol(&self, i: usize) -> u8 {
        debug_assert!(i >= 1);
        self.prefix.get(i - 1).copied().unwrap_or(self.tail)
    }

    /// The first `k` coordinates.
    pub fn first_symbols(&self, k: usize) -> Vec<u8> {
        (1..=k).map(|i| self.symbol(i)).collect()
    }

    /// `(x_1 … x_k ẋ_{k+1})`: the point of `V_k` whose cylinder of length
    /// `k+1` contains this point.
    pub fn truncate(&self, k: usize) -> Point {
        Point::new(self.first_symbols(k), self.symbol(k + 1))
    }

    pub fn is_fixed(&self) -> bool {
        self.prefix.is_empty()
    }

    /// Whether the point lies in the cylinder `[w]`.
    pub fn in_cylinder(&self, w: &[u8]) -> bool {
        w.iter().enumerate().all(|(i, &s)| self.symbol(i + 1) == s)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.prefix.iter().chain([&self.tail]).all(|&s| s <= 9) {
            write!(f, "{}~{}", render_symbols(&self.prefix), self.tail)
        } else {
            // multi-digit symbols: every prefix symbol is followed by '.'
            for s in &self.prefix {
                write!(f, "{s}.")?;
            }
            write!(f, "~{}", self.tail)
        }
    }
}

impl FromStr for Point {
    type Err = Error;

    /// `"12~1"` is `(1 2 1̇)`; `"~3"` is `(3̇)`.
    fn from_str(s: &str) -> Result<Self> {
        let (pre, tail) = s
            .trim()
            .split_once('~')
            .ok_or_else(|| Error::Parse(format!("point {s:?} lacks '~'")))?;
        let prefix = match pre.strip_suffix('.') {
            Some(dotted) => dotted
                .split('.')
                .map(|t| {
                    t.trim()
                        .parse::<u8>()
                        .ok()
                        .filter(|&v| v >= 1)
                        .ok_or_else(|| Error::Parse(format!("bad symbol {t:?}")))
                })
                .collect::<Result<Vec<u8>>>()?,
            None => parse_symbols(pre)?,
        };
        let tail = tail
            .trim()
            .parse::<u8>()
            .ok()
            .filter(|&v| v >= 1)
            .ok_or_else(|| Error::Parse(format!("point {s:?} needs one tail symbol")))?;
        Ok(Point::new(prefix, tail))
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `σ`: drops the first coordinate.
pub fn shift(p: &Point) -> Point {
    if p.prefix.is_empty() {
        p.clone()
    } else {
        Point::new(p.prefix[1..].to_vec(), p.tail)
    }
}

/// `σ_l`: prepends `l`.
pub fn inverse_branch(alphabet: Alphabet, l: usize, p: &Point) -> Result<Point> {
    let l = alphabet.check_symbol(l)?;
    let mut prefix = Vec::with_capacity(p.prefix.len() + 1);
    prefix.push(l);
    prefix.extend_from_slice(&p.prefix);
    Ok(Point::new(prefix, p.tail))
}

/// First index of disagreement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RhoValue {
    Finite(usize),
    Infinite,
}

impl RhoValue {
    pub fn finite(self) -> Option<usize> {
        match self {
            RhoValue::Finite(k) => Some(k),
            RhoValue::Infinite => None,
        }
    }
}

pub fn rho(x: &Point, y: &Point) -> RhoValue {
    let horizon = x.depth().max(y.depth()) + 1;
    (1..=horizon)
        .find(|&i| x.symbol(i) != y.symbol(i))
        .map_or(RhoValue::Infinite, RhoValue::Finite)
}

/// `1 / 2^ρ(x, y)`, zero for equal points.
pub fn distance(x: &Point, y: &Point) -> Rational {
    match rho(x, y) {
        RhoValue::Finite(k) => inv_pow(2, k),
        RhoValue::Infinite => Rational::from_integer(0.into()),
    }
}

/// Whether `p` and `q` (both in `V_m`) are `m`-related and distinct.
pub fn related(p: &Point, q: &Point, m: usize) -> bool {
    p != q && p.depth() <= m && q.depth() <= m && (1..=m).all(|i| p.symbol(i) == q.symbol(i))
}

/// The ordered level set `V_m`.
#[derive(Debug, Clone)]
pub struct LevelSet {
    alphabet: Alphabet,
    level: usize,
    points: Vec<Point>,
    index: HashMap<Point, usize>,
}

impl LevelSet {
    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &Point {
        &self.points[i]
    }

    pub fn position(&self, p: &Point) -> Option<usize> {
        self.index.get(p).copied()
    }

    /// Index range of `V_m \ V_{m-1}` (all of `V_0` when `m = 0`).
    pub fn new_range(&self) -> std::ops::Range<usize> {
        let start = if self.level == 0 {
            0
        } else {
            self.points.len() / self.alphabet.size()
        };
        start..self.points.len()
    }

    pub fn new_points(&self) -> &[Point] {
        &self.points[self.new_range()]
    }

    /// JSON array of point strings in order.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.points).expect("points serialize")
    }
}

fn check_cap(alphabet: Alphabet, m: usize, cap: u128) -> Result<usize> {
    let requested = alphabet.pow(m + 1).unwrap_or(u128::MAX);
    if requested > cap {
        return Err(Error::ResourceLimit {
            what: "level set",
            requested,
            cap,
        });
    }
    Ok(requested as usize)
}

/// Enumerates `V_m` in order with the default point cap.
pub fn enumerate_level(alphabet: Alphabet, m: usize) -> Result<LevelSet> {
    enumerate_level_capped(alphabet, m, DEFAULT_POINT_CAP)
}

/// `V_0` is `(1̇) ≺ … ≺ (Ṅ)`; each `V_k` appends the new points `σ_l(r)`,
/// keyed by the position of `r` in `V_{k-1}` and then by `l`.
pub fn enumerate_level_capped(alphabet: Alphabet, m: usize, cap: u128) -> Result<LevelSet> {
    let total = check_cap(alphabet, m, cap)?;
    let mut points: Vec<Point> = Vec::with_capacity(total);
    points.extend(alphabet.symbols().map(Point::fixed));
    for k in 1..=m {
        let parents = if k == 1 {
            0..points.len()
        } else {
            points.len() / alphabet.size()..points.len()
        };
        let mut fresh = Vec::with_capacity(points.len() * (alphabet.size() - 1));
        for r in &points[parents] {
            for l in alphabet.symbols() {
                let q = inverse_branch(alphabet, l as usize, r)?;
                if q.depth() == k {
                    fresh.push(q);
                }
            }
        }
        points.extend(fresh);
    }
    debug_assert_eq!(points.len(), total);
    let index = points
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, p)| (p, i))
        .collect();
    Ok(LevelSet {
        alphabet,
        level: m,
        points,
        index,
    })
}

/// The `N` members of the `m`-class of `p`: `(p_1 … p_m l̇)` for each `l`.
pub fn class_members(alphabet: Alphabet, p: &Point, m: usize) -> Vec<Point> {
    let head = p.first_symbols(m);
    alphabet
        .symbols()
        .map(|l| Point::new(head.clone(), l))
        .collect()
}

/// `𝒰_{p,m}`: the `N-1` points of `V_m` that are `m`-related to `p`.
pub fn neighbours(alphabet: Alphabet, p: &Point, m: usize) -> Result<Vec<Point>> {
    if p.depth() > m {
        return Err(Error::DepthExceedsLevel {
            point: p.to_string(),
            depth: p.depth(),
            level: m,
        });
    }
    Ok(class_members(alphabet, p, m)
        .into_iter()
        .filter(|q| q != p)
        .collect())
}

/// Neighbours of a new point `p ∈ V_m \ V_{m-1}` split as `U_{p,m}` (the
/// `N-2` new ones) and the single neighbour in `V_{m-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NewNeighbours {
    pub fresh: Vec<Point>,
    pub parent: Point,
}

pub fn new_neighbours(alphabet: Alphabet, p: &Point, m: usize) -> Result<NewNeighbours> {
    if m == 0 || p.depth() != m {
        return Err(Error::NotNewAtLevel {
            point: p.to_string(),
            level: m,
        });
    }
    let (pm, tail) = (p.symbol(m), p.symbol(m + 1));
    let head = p.first_symbols(m);
    let fresh = alphabet
        .symbols()
        .filter(|&l| l != pm && l != tail)
        .map(|l| Point::new(head.clone(), l))
        .collect();
    Ok(NewNeighbours {
        fresh,
        parent: Point::new(p.first_symbols(m - 1), pm),
    })
}

/// `(ṗ_1), …, p`: the truncations of `p` at every coordinate `n` with
/// `p_n ≠ p_{n+1}`. Consecutive entries are related at the later one's depth.
pub fn connecting_chain(p: &Point) -> Vec<Point> {
    let mut chain = vec![Point::fixed(p.symbol(1))];
    for n in 1..=p.depth() {
        if p.symbol(n) != p.symbol(n + 1) {
            chain.push(p.truncate(n));
        }
    }
    chain
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(s: &str) -> Point {
        s.parse().unwrap()
    }

    fn abc(n: usize) -> Alphabet {
        Alphabet::new(n).unwrap()
    }

    fn listing(n: usize, m: usize) -> Vec<String> {
        enumerate_level(abc(n), m)
            .unwrap()
            .points()
            .iter()
            .map(|p| p.to_string())
            .collect()
    }

    #[test]
    fn point_text_form() {
        assert_eq!(pt("12~1").to_string(), "12~1");
        assert_eq!(pt("11~1"), Point::fixed(1));
        assert_eq!(pt("~2").depth(), 0);
        assert_eq!(pt("122~2"), pt("1~2"));
        assert!("12".parse::<Point>().is_err());
        assert!(abc(2).parse_point("13~1").is_err());
        for wide in [
            Point::new(vec![10, 3], 2),
            Point::new(vec![12], 3),
            Point::fixed(11),
        ] {
            assert_eq!(wide.to_string().parse::<Point>().unwrap(), wide);
        }
        assert_eq!(Point::new(vec![10, 3], 2).to_string(), "10.3.~2");
    }

    #[test]
    fn shift_examples() {
        assert_eq!(shift(&pt("2~1")), pt("~1"));
        assert_eq!(shift(&pt("~1")), pt("~1"));
        assert_eq!(shift(&pt("12~1")), pt("2~1"));
    }

    #[test]
    fn inverse_branch_examples() {
        let a = abc(3);
        assert_eq!(inverse_branch(a, 2, &pt("~1")).unwrap(), pt("2~1"));
        assert_eq!(inverse_branch(a, 1, &pt("~1")).unwrap(), pt("~1"));
        assert_eq!(inverse_branch(a, 3, &pt("1~2")).unwrap(), pt("31~2"));
        assert!(inverse_branch(a, 4, &pt("~1")).is_err());
        assert!(inverse_branch(a, 0, &pt("~1")).is_err());
    }

    #[test]
    fn rho_and_distance_examples() {
        assert_eq!(rho(&pt("~1"), &pt("~2")), RhoValue::Finite(1));
        assert_eq!(rho(&pt("1~2"), &pt("1~3")), RhoValue::Finite(2));
        assert_eq!(rho(&pt("~1"), &pt("~1")), RhoValue::Infinite);
        assert_eq!(distance(&pt("~1"), &pt("~2")), crate::numeric::ratio(1, 2));
        assert_eq!(
            distance(&pt("1~2"), &pt("1~3")),
            crate::numeric::ratio(1, 4)
        );
        assert_eq!(distance(&pt("1~2"), &pt("1~2")), crate::numeric::int(0));
        // agreement runs past the longer prefix
        assert_eq!(rho(&pt("12~1"), &pt("121~2")), RhoValue::Finite(4));
    }

    #[test]
    fn level_listings() {
        assert_eq!(listing(2, 0), ["~1", "~2"]);
        assert_eq!(listing(2, 1), ["~1", "~2", "2~1", "1~2"]);
        assert_eq!(
            listing(3, 1),
            ["~1", "~2", "~3", "2~1", "3~1", "1~2", "3~2", "1~3", "2~3"]
        );
        let v2 = listing(3, 2);
        assert_eq!(v2.len(), 27);
        assert_eq!(&v2[..9], &listing(3, 1)[..]);
        assert_eq!(
            &v2[9..],
            [
                "12~1", "22~1", "32~1", "13~1", "23~1", "33~1", "11~2", "21~2", "31~2", "13~2",
                "23~2", "33~2", "11~3", "21~3", "31~3", "12~3", "22~3", "32~3"
            ]
        );
        // first and last new points of V_m
        let v3 = enumerate_level(abc(3), 3).unwrap();
        assert_eq!(v3.point(27), &pt("112~1"));
        assert_eq!(v3.point(80), &pt("332~3"));
    }

    #[test]
    fn level_cap() {
        assert!(matches!(
            enumerate_level_capped(abc(3), 5, 100),
            Err(Error::ResourceLimit { requested: 729, .. })
        ));
    }

    #[test]
    fn neighbour_examples() {
        let a3 = abc(3);
        let mut u = neighbours(a3, &pt("1~2"), 1).unwrap();
        u.sort();
        assert_eq!(u, vec![pt("~1"), pt("1~3")]);
        let mut u = neighbours(a3, &pt("~3"), 2).unwrap();
        u.sort();
        assert_eq!(u, vec![pt("33~1"), pt("33~2")]);
        assert_eq!(neighbours(abc(2), &pt("2~1"), 1).unwrap(), vec![pt("~2")]);
        assert!(neighbours(a3, &pt("12~1"), 1).is_err());
    }

    #[test]
    fn new_neighbour_examples() {
        let nn = new_neighbours(abc(3), &pt("1~2"), 1).unwrap();
        assert_eq!(nn.fresh, vec![pt("1~3")]);
        assert_eq!(nn.parent, pt("~1"));
        let nn = new_neighbours(abc(2), &pt("2~1"), 1).unwrap();
        assert!(nn.fresh.is_empty());
        assert_eq!(nn.parent, pt("~2"));
        let nn = new_neighbours(abc(4), &pt("1~2"), 1).unwrap();
        assert_eq!(nn.fresh, vec![pt("1~3"), pt("1~4")]);
        assert!(new_neighbours(abc(3), &pt("~1"), 1).is_err());
        assert!(new_neighbours(abc(3), &pt("1~2"), 2).is_err());
    }

    #[test]
    fn chain_examples() {
        assert_eq!(connecting_chain(&pt("~1")), vec![pt("~1")]);
        assert_eq!(
            connecting_chain(&pt("12~1")),
            vec![pt("~1"), pt("1~2"), pt("12~1")]
        );
        assert_eq!(connecting_chain(&pt("2~1")), vec![pt("~2"), pt("2~1")]);
        // repeated coordinates are skipped
        assert_eq!(
            connecting_chain(&pt("112~1")),
            vec![pt("~1"), pt("11~2"), pt("112~1")]
        );
    }
}
