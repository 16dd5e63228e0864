//! Slater determinants over a finite spin-orbital basis.
//!
//! Orbitals are 1-based (`1..=m`). A determinant is stored as an occupation
//! bitmask, bit `p - 1` for orbital `p`; the mask never appears in any
//! external format. Determinants are ordered colexicographically, which is
//! the numeric order of their masks.
//!
//! Phase convention: `|i1 i2 ... in>` with `i1 < i2 < ... < in` stands for
//! `a†_i1 a†_i2 ... a†_in |0>`. Operator strings act right to left and each
//! ladder operator on orbital `p` picks up `(-1)^k`, where `k` is the number
//! of occupied orbitals with index strictly below `p`.

use std::fmt;

use crate::error::{Error, Result};

/// Largest supported spin-orbital count (one machine word of occupations).
pub const MAX_ORBITALS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    /// `+1` for up, `-1` for down (twice the S_z contribution).
    pub fn twice_sz(self) -> i32 {
        match self {
            Spin::Up => 1,
            Spin::Down => -1,
        }
    }

    pub fn from_char(c: char) -> Option<Spin> {
        match c {
            'u' | 'U' | 'a' | '+' => Some(Spin::Up),
            'd' | 'D' | 'b' | '-' => Some(Spin::Down),
            _ => None,
        }
    }
}

/// Electron count, orbital count and optional spin labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisSpec {
    n: usize,
    m: usize,
    spin_labels: Option<Vec<Spin>>,
}

impl BasisSpec {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidBasis(format!(
                "n and m must be positive (n = {n}, m = {m})"
            )));
        }
        if n > m {
            return Err(Error::InvalidBasis(format!("n = {n} exceeds m = {m}")));
        }
        if m > MAX_ORBITALS {
            return Err(Error::InvalidBasis(format!(
                "m = {m} exceeds the maximum of {MAX_ORBITALS}"
            )));
        }
        Ok(Self {
            n,
            m,
            spin_labels: None,
        })
    }

    pub fn with_spins(n: usize, m: usize, labels: Vec<Spin>) -> Result<Self> {
        let mut basis = Self::new(n, m)?;
        if labels.len() != m {
            return Err(Error::InvalidBasis(format!(
                "{} spin labels for {m} orbitals",
                labels.len()
            )));
        }
        basis.spin_labels = Some(labels);
        Ok(basis)
    }

    /// Spin labels up, down, up, down, ... starting with orbital 1.
    pub fn alternating_spins(n: usize, m: usize) -> Result<Self> {
        let labels = (0..m)
            .map(|i| if i % 2 == 0 { Spin::Up } else { Spin::Down })
            .collect();
        Self::with_spins(n, m, labels)
    }

    /// Parses labels such as `"uudud"`; commas and whitespace are ignored.
    pub fn with_spin_string(n: usize, m: usize, labels: &str) -> Result<Self> {
        let parsed = labels
            .chars()
            .filter(|c| !c.is_whitespace() && *c != ',')
            .map(|c| {
                Spin::from_char(c)
                    .ok_or_else(|| Error::InvalidBasis(format!("unknown spin label {c:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::with_spins(n, m, parsed)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn spin_labels(&self) -> Option<&[Spin]> {
        self.spin_labels.as_deref()
    }

    /// Number of determinants, C(m, n).
    pub fn dimension(&self) -> u64 {
        binomial(self.m, self.n)
    }

    /// Same (n, m) without spin labels.
    pub fn without_spins(&self) -> BasisSpec {
        BasisSpec {
            n: self.n,
            m: self.m,
            spin_labels: None,
        }
    }

    /// The determinant `{1, ..., n}`.
    pub fn reference(&self) -> SlaterDeterminant {
        SlaterDeterminant {
            mask: low_mask(self.n),
        }
    }

    pub fn check(&self, det: &SlaterDeterminant) -> Result<()> {
        if det.len() != self.n {
            return Err(Error::ElectronCountMismatch {
                expected: self.n,
                found: det.len(),
            });
        }
        if self.m < 64 && det.mask >> self.m != 0 {
            return Err(Error::OrbitalOutOfRange {
                orbital: 64 - det.mask.leading_zeros() as usize,
                m: self.m,
            });
        }
        Ok(())
    }

    fn check_orbital(&self, p: usize) -> Result<()> {
        if p == 0 || p > self.m {
            Err(Error::OrbitalOutOfRange {
                orbital: p,
                m: self.m,
            })
        } else {
            Ok(())
        }
    }
}

fn low_mask(k: usize) -> u64 {
    if k >= 64 {
        u64::MAX
    } else {
        (1u64 << k) - 1
    }
}

/// Binomial coefficient; saturates at `u64::MAX`.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// A set of occupied spin orbitals.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SlaterDeterminant {
    mask: u64,
}

impl SlaterDeterminant {
    /// Builds a determinant from a strictly increasing list of 1-based orbitals.
    pub fn new(orbitals: &[usize]) -> Result<Self> {
        let mut mask = 0u64;
        let mut last = 0usize;
        for &p in orbitals {
            if p == 0 || p > MAX_ORBITALS {
                return Err(Error::OrbitalOutOfRange {
                    orbital: p,
                    m: MAX_ORBITALS,
                });
            }
            if p <= last {
                return Err(Error::NotStrictlyIncreasing(orbitals.to_vec()));
            }
            last = p;
            mask |= 1u64 << (p - 1);
        }
        Ok(Self { mask })
    }

    /// As [`SlaterDeterminant::new`], additionally validated against `basis`.
    pub fn in_basis(basis: &BasisSpec, orbitals: &[usize]) -> Result<Self> {
        let det = Self::new(orbitals)?;
        basis.check(&det)?;
        Ok(det)
    }

    pub(crate) fn from_mask(mask: u64) -> Self {
        Self { mask }
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    /// Occupied orbitals in increasing order.
    pub fn orbitals(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> {
        let mut mask = self.mask;
        std::iter::from_fn(move || {
            if mask == 0 {
                None
            } else {
                let p = mask.trailing_zeros() as usize;
                mask &= mask - 1;
                Some(p + 1)
            }
        })
    }

    pub fn len(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    pub fn contains(&self, orbital: usize) -> bool {
        (1..=MAX_ORBITALS).contains(&orbital) && self.mask & (1u64 << (orbital - 1)) != 0
    }

    /// Eigenvalue of `a†_p a_p`: 1 if orbital `p` is occupied.
    pub fn occupation(&self, orbital: usize) -> u8 {
        u8::from(self.contains(orbital))
    }

    /// Number of occupied orbitals with index strictly below `orbital`.
    fn occupied_below(&self, orbital: usize) -> u32 {
        (self.mask & low_mask(orbital - 1)).count_ones()
    }

    /// Number of orbitals not shared with `reference`: `n - |det ∩ ref|`.
    pub fn excitation_order(&self, reference: &SlaterDeterminant) -> Result<usize> {
        if self.len() != reference.len() {
            return Err(Error::ElectronCountMismatch {
                expected: reference.len(),
                found: self.len(),
            });
        }
        Ok(self.len() - (self.mask & reference.mask).count_ones() as usize)
    }

    /// Orbitals occupied here and empty in `other`.
    pub fn difference(&self, other: &SlaterDeterminant) -> Vec<usize> {
        SlaterDeterminant::from_mask(self.mask & !other.mask).orbitals()
    }

    /// Orbitals occupied in both.
    pub fn intersection(&self, other: &SlaterDeterminant) -> Vec<usize> {
        SlaterDeterminant::from_mask(self.mask & other.mask).orbitals()
    }

    /// Twice the total S_z under the given spin labels.
    pub fn twice_sz(&self, labels: &[Spin]) -> i32 {
        self.iter().map(|p| labels[p - 1].twice_sz()).sum()
    }

    /// Colexicographic rank among all n-subsets.
    pub fn rank(&self) -> u64 {
        self.iter()
            .enumerate()
            .map(|(i, p)| binomial(p - 1, i + 1))
            .sum()
    }

    /// Inverse of [`SlaterDeterminant::rank`].
    pub fn unrank(basis: &BasisSpec, rank: u64) -> Result<Self> {
        let count = basis.dimension();
        if rank >= count {
            return Err(Error::RankOutOfRange { rank, count });
        }
        let mut remaining = rank;
        let mut mask = 0u64;
        let mut top = basis.m();
        for k in (1..=basis.n()).rev() {
            // largest c with C(c, k) <= remaining
            let mut c = top - 1;
            while binomial(c, k) > remaining {
                c -= 1;
            }
            remaining -= binomial(c, k);
            mask |= 1u64 << c;
            top = c;
        }
        Ok(Self { mask })
    }

    pub fn create(&self, orbital: usize) -> SignedDeterminant {
        if self.contains(orbital) {
            return SignedDeterminant::NULL;
        }
        SignedDeterminant {
            det: Some(Self::from_mask(self.mask | (1u64 << (orbital - 1)))),
            sign: parity_sign(self.occupied_below(orbital)),
        }
    }

    pub fn annihilate(&self, orbital: usize) -> SignedDeterminant {
        if !self.contains(orbital) {
            return SignedDeterminant::NULL;
        }
        SignedDeterminant {
            det: Some(Self::from_mask(self.mask & !(1u64 << (orbital - 1)))),
            sign: parity_sign(self.occupied_below(orbital)),
        }
    }

    /// Applies `a†_create a_annihilate`.
    pub fn apply_excitation(&self, create: usize, annihilate: usize) -> SignedDeterminant {
        self.annihilate(annihilate).then(Ladder::Create(create))
    }

    /// Applies an operator string written left to right; the rightmost
    /// operator acts first.
    pub fn apply_string(&self, ops: &[Ladder]) -> SignedDeterminant {
        ops.iter()
            .rev()
            .fold(SignedDeterminant::from(*self), |acc, op| acc.then(*op))
    }
}

fn parity_sign(k: u32) -> i8 {
    if k.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

impl fmt::Debug for SlaterDeterminant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for SlaterDeterminant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, p) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "}}")
    }
}

/// A ladder operator on a 1-based orbital.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ladder {
    Create(usize),
    Annihilate(usize),
}

/// Result of applying ladder operators: a determinant with a phase, or zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignedDeterminant {
    pub det: Option<SlaterDeterminant>,
    /// `+1` or `-1`; meaningless when `det` is `None`.
    pub sign: i8,
}

impl SignedDeterminant {
    pub const NULL: SignedDeterminant = SignedDeterminant { det: None, sign: 1 };

    pub fn is_null(&self) -> bool {
        self.det.is_none()
    }

    pub fn then(self, op: Ladder) -> SignedDeterminant {
        let Some(det) = self.det else {
            return SignedDeterminant::NULL;
        };
        let next = match op {
            Ladder::Create(p) => det.create(p),
            Ladder::Annihilate(p) => det.annihilate(p),
        };
        SignedDeterminant {
            det: next.det,
            sign: self.sign * next.sign,
        }
    }

    pub fn phase(&self) -> f64 {
        match self.det {
            Some(_) => f64::from(self.sign),
            None => 0.0,
        }
    }
}

impl From<SlaterDeterminant> for SignedDeterminant {
    fn from(det: SlaterDeterminant) -> Self {
        SignedDeterminant {
            det: Some(det),
            sign: 1,
        }
    }
}

/// All C(m, n) determinants in colexicographic order.
pub fn enumerate_determinants(basis: &BasisSpec) -> Vec<SlaterDeterminant> {
    let n = basis.n();
    let limit: u128 = 1u128 << basis.m();
    let mut out = Vec::with_capacity(basis.dimension().min(1 << 20) as usize);
    let mut mask: u128 = (1u128 << n) - 1;
    while mask < limit {
        out.push(SlaterDeterminant::from_mask(mask as u64));
        // Gosper's hack: next integer with the same popcount
        let c = mask & mask.wrapping_neg();
        let r = mask + c;
        mask = (((r ^ mask) >> 2) / c) | r;
    }
    out
}

/// Determinants with the given twice-S_z value under the basis spin labels.
pub fn enumerate_sector(basis: &BasisSpec, twice_sz: i32) -> Result<Vec<SlaterDeterminant>> {
    let labels = basis.spin_labels().ok_or(Error::MissingSpinLabels)?;
    Ok(enumerate_determinants(basis)
        .into_iter()
        .filter(|d| d.twice_sz(labels) == twice_sz)
        .collect())
}

/// `number_operator_eigenvalue` with orbital validation.
pub fn number_operator_eigenvalue(
    basis: &BasisSpec,
    det: &SlaterDeterminant,
    orbital: usize,
) -> Result<u8> {
    basis.check_orbital(orbital)?;
    Ok(det.occupation(orbital))
}
