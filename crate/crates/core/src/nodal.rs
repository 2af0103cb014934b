//! Sign patterns, strong and weak nodal domains, and refined Urschel numbers.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DisjointSets, Graph};

/// Default relative threshold below which an entry counts as zero.
pub const ZERO_TOL: f64 = 1e-7;
/// Default cap on the number of zeros for exhaustive signing enumeration.
pub const MAX_ZEROS: usize = 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "-")]
    Neg,
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "+")]
    Pos,
}

impl Sign {
    pub fn of(x: f64) -> Sign {
        if x > 0.0 {
            Sign::Pos
        } else if x < 0.0 {
            Sign::Neg
        } else {
            Sign::Zero
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Pos => Sign::Neg,
            Sign::Neg => Sign::Pos,
            Sign::Zero => Sign::Zero,
        }
    }

    fn symbol(self) -> char {
        match self {
            Sign::Pos => '+',
            Sign::Zero => '0',
            Sign::Neg => '-',
        }
    }
}

/// Per-vertex signs in `{+, 0, -}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignPattern(pub Vec<Sign>);

impl SignPattern {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn signs(&self) -> &[Sign] {
        &self.0
    }

    /// Indices of zero entries, ascending.
    pub fn zeros(&self) -> Vec<usize> {
        (0..self.len()).filter(|&v| self.0[v] == Sign::Zero).collect()
    }

    pub fn zero_count(&self) -> usize {
        self.0.iter().filter(|&&s| s == Sign::Zero).count()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.len()).filter(|&v| self.0[v] != Sign::Zero).collect()
    }

    pub fn is_nowhere_zero(&self) -> bool {
        self.zero_count() == 0
    }

    pub fn negated(&self) -> SignPattern {
        SignPattern(self.0.iter().map(|s| s.flip()).collect())
    }

    /// True when `self` agrees with `parent` at every vertex where `parent`
    /// is nonzero.
    pub fn refines(&self, parent: &SignPattern) -> bool {
        self.len() == parent.len()
            && self.0.iter().zip(&parent.0).all(|(a, b)| *b == Sign::Zero || a == b)
    }

    /// Parse a string over `+`, `0`, `-`.
    pub fn parse(s: &str) -> Result<SignPattern> {
        s.chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '+' => Ok(Sign::Pos),
                '0' => Ok(Sign::Zero),
                '-' => Ok(Sign::Neg),
                other => Err(Error::Parse { line: 1, message: format!("unexpected sign {other:?}") }),
            })
            .collect::<Result<Vec<_>>>()
            .map(SignPattern)
    }
}

impl fmt::Display for SignPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|s| write!(f, "{}", s.symbol()))
    }
}

/// A nowhere-zero sign vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(into = "String")]
pub struct Signing(SignPattern);

impl Signing {
    pub fn new(p: SignPattern) -> Option<Signing> {
        p.is_nowhere_zero().then_some(Signing(p))
    }

    pub fn pattern(&self) -> &SignPattern {
        &self.0
    }

    pub fn is_signing_of(&self, parent: &SignPattern) -> bool {
        self.0.refines(parent)
    }
}

impl From<Signing> for String {
    fn from(s: Signing) -> String {
        s.0.to_string()
    }
}

impl fmt::Display for Signing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Sign pattern of `f` with entries `|f(v)| ≤ zero_tol · ‖f‖∞` set to zero.
pub fn sign_pattern(f: &DVector<f64>, zero_tol: f64) -> Result<SignPattern> {
    let scale = f.amax();
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::ZeroVector);
    }
    let cut = zero_tol * scale;
    Ok(SignPattern(
        f.iter().map(|&x| if x.abs() <= cut { Sign::Zero } else { Sign::of(x) }).collect(),
    ))
}

/// Factor below `zero_tol` under which a zero entry counts as clearly zero.
/// With the default tolerance the band starts at Jacobi accuracy, 1e-12.
pub const NEAR_ZERO_BAND: f64 = 1e-5;

/// Entries classified as zero by `sign_pattern` that are still larger than
/// `NEAR_ZERO_BAND · zero_tol · ‖f‖∞`. These zeros are threshold artifacts
/// rather than structural.
pub fn near_zero_entries(f: &DVector<f64>, zero_tol: f64) -> Vec<usize> {
    let scale = f.amax();
    let (lo, hi) = (NEAR_ZERO_BAND * zero_tol * scale, zero_tol * scale);
    (0..f.len()).filter(|&i| f[i].abs() > lo && f[i].abs() <= hi).collect()
}

fn check_len(g: &Graph, p: &SignPattern) -> Result<()> {
    if p.len() != g.n() {
        return Err(Error::Dimension { expected: g.n(), found: p.len() });
    }
    Ok(())
}

/// Strong nodal domain count.
pub fn snd(g: &Graph, p: &SignPattern) -> Result<usize> {
    check_len(g, p)?;
    let mut ds = DisjointSets::new(g.n());
    Ok(snd_with(g, p.signs(), &mut ds))
}

fn snd_with(g: &Graph, signs: &[Sign], ds: &mut DisjointSets) -> usize {
    ds.reset();
    let mut count = signs.iter().filter(|&&s| s != Sign::Zero).count();
    for &(u, v) in g.edges() {
        if signs[u] != Sign::Zero && signs[u] == signs[v] && ds.union(u, v) {
            count -= 1;
        }
    }
    count
}

/// Weak nodal domain count.
pub fn wnd(g: &Graph, p: &SignPattern) -> Result<usize> {
    check_len(g, p)?;
    let mut total = 0;
    for side in [Sign::Pos, Sign::Neg] {
        let mask: Vec<bool> = p.signs().iter().map(|&s| s == side || s == Sign::Zero).collect();
        total += g
            .components_of_mask(&mask)
            .iter()
            .filter(|part| part.iter().any(|&v| p.signs()[v] == side))
            .count();
    }
    Ok(total)
}

/// Distribution of SND over all `2^ℓ` signings of a pattern.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UrschelProfile {
    pub ell: usize,
    /// `(snd value, number of signings)`, ascending by value.
    pub histogram: Vec<(usize, u64)>,
    /// First signing in enumeration order attaining each SND value.
    pub witnesses: Vec<(usize, Signing)>,
}

impl UrschelProfile {
    pub fn total(&self) -> u64 {
        1u64 << self.ell
    }

    /// `UN_i` for `1 ≤ i ≤ 2^ℓ`.
    pub fn un_i(&self, i: u64) -> Option<usize> {
        if i == 0 || i > self.total() {
            return None;
        }
        let mut seen = 0;
        for &(value, count) in &self.histogram {
            seen += count;
            if seen >= i {
                return Some(value);
            }
        }
        None
    }

    pub fn un(&self) -> usize {
        self.histogram[0].0
    }

    pub fn un_max(&self) -> usize {
        self.histogram[self.histogram.len() - 1].0
    }

    /// Number of signings with SND at most `bound`.
    pub fn count_at_most(&self, bound: usize) -> u64 {
        self.histogram.iter().filter(|(v, _)| *v <= bound).map(|(_, c)| c).sum()
    }

    /// The full ascending list `UN_1, …, UN_{2^ℓ}`.
    pub fn snd_sorted(&self) -> Vec<usize> {
        self.histogram
            .iter()
            .flat_map(|&(v, c)| std::iter::repeat_n(v, c as usize))
            .collect()
    }

    pub fn witness(&self, value: usize) -> Option<&Signing> {
        self.witnesses.iter().find(|(v, _)| *v == value).map(|(_, s)| s)
    }
}

/// Enumerate every signing of `p` and tabulate their SND values.
///
/// Signing `i` sets the `b`-th zero (ascending vertex order) to `+` when bit
/// `b` of `i` is one and to `-` otherwise.
pub fn urschel_profile(g: &Graph, p: &SignPattern, max_zeros: usize) -> Result<UrschelProfile> {
    check_len(g, p)?;
    for part in g.components_of_mask(&vec![true; g.n()]) {
        if part.iter().all(|&v| p.signs()[v] == Sign::Zero) {
            return Err(Error::VanishesOnComponent(part[0]));
        }
    }
    let zeros = p.zeros();
    let ell = zeros.len();
    if ell > max_zeros {
        return Err(Error::EnumerationBudget { zeros: ell, budget: max_zeros });
    }

    let mut signs = p.signs().to_vec();
    let mut ds = DisjointSets::new(g.n());
    let mut counts: BTreeMap<usize, (u64, u64)> = BTreeMap::new();
    for mask in 0..(1u64 << ell) {
        for (b, &v) in zeros.iter().enumerate() {
            signs[v] = if mask >> b & 1 == 1 { Sign::Pos } else { Sign::Neg };
        }
        let value = snd_with(g, &signs, &mut ds);
        counts.entry(value).or_insert((0, mask)).0 += 1;
    }

    let histogram = counts.iter().map(|(&v, &(c, _))| (v, c)).collect();
    let witnesses = counts
        .iter()
        .map(|(&v, &(_, mask))| {
            let mut s = p.signs().to_vec();
            for (b, &z) in zeros.iter().enumerate() {
                s[z] = if mask >> b & 1 == 1 { Sign::Pos } else { Sign::Neg };
            }
            (v, Signing(SignPattern(s)))
        })
        .collect();
    Ok(UrschelProfile { ell, histogram, witnesses })
}
