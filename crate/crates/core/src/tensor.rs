//! Truncated tensor algebra over ℝ^D.
//!
//! Elements hold one dense coefficient array per level n = 0..N, indexed by
//! words i₁…i_n over the alphabet {1,…,D} in row-major order
//! (word ↦ Σ (i_j − 1)·D^{n−j}). The algebra operations — concatenation
//! product, exponential, logarithm, inverse — are exact in the truncation:
//! elements with zero scalar part are nilpotent, so every series below is a
//! finite sum.

use thiserror::Error;

/// Default cap on the total number of coefficients (all levels summed).
pub const DEFAULT_COEFF_CAP: usize = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("tensor shapes differ: ({dim_a}, {level_a}) vs ({dim_b}, {level_b})")]
    ShapeMismatch {
        dim_a: usize,
        level_a: usize,
        dim_b: usize,
        level_b: usize,
    },
    #[error("exponential requires zero scalar part, got {got}")]
    NonzeroScalarPart { got: f64 },
    #[error("logarithm requires scalar part 1, got {got}")]
    BadScalarPart { got: f64 },
    #[error("word of length {len} exceeds truncation level {level}")]
    WordTooLong { len: usize, level: usize },
    #[error("letter {letter} outside alphabet 1..={dim}")]
    LetterOutOfRange { letter: usize, dim: usize },
    #[error("tensor with dim {dim} and level {level} needs {needed} coefficients, cap is {cap}")]
    CoefficientCapExceeded {
        dim: usize,
        level: usize,
        needed: usize,
        cap: usize,
    },
}

/// A word over the alphabet {1,…,D}; indexes one tensor coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word(Vec<usize>);

impl Word {
    pub fn new(letters: Vec<usize>, dim: usize) -> Result<Self, TensorError> {
        if let Some(&bad) = letters.iter().find(|&&l| l == 0 || l > dim) {
            return Err(TensorError::LetterOutOfRange { letter: bad, dim });
        }
        Ok(Word(letters))
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    /// Row-major index of this word within its level.
    pub fn index(&self, dim: usize) -> usize {
        self.0.iter().fold(0, |acc, &l| acc * dim + (l - 1))
    }
}

/// Coefficients of levels 0..=N of the tensor algebra over ℝ^D.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedTensor {
    dim: usize,
    level: usize,
    levels: Vec<Vec<f64>>,
}

fn coefficient_count(dim: usize, level: usize) -> Option<usize> {
    let mut total = 0usize;
    let mut size = 1usize;
    for _ in 0..=level {
        total = total.checked_add(size)?;
        size = size.checked_mul(dim)?;
    }
    Some(total)
}

impl TruncatedTensor {
    /// The zero element. Errors when the dense storage would exceed `cap`
    /// coefficients ([`DEFAULT_COEFF_CAP`] for [`TruncatedTensor::zeros`]).
    pub fn zeros_with_cap(dim: usize, level: usize, cap: usize) -> Result<Self, TensorError> {
        assert!(dim >= 1 && level >= 1, "alphabet size and level must be positive");
        let needed = coefficient_count(dim, level).unwrap_or(usize::MAX);
        if needed > cap {
            return Err(TensorError::CoefficientCapExceeded {
                dim,
                level,
                needed,
                cap,
            });
        }
        let mut levels = Vec::with_capacity(level + 1);
        let mut size = 1usize;
        for _ in 0..=level {
            levels.push(vec![0.0; size]);
            size *= dim;
        }
        Ok(TruncatedTensor { dim, level, levels })
    }

    pub fn zeros(dim: usize, level: usize) -> Result<Self, TensorError> {
        Self::zeros_with_cap(dim, level, DEFAULT_COEFF_CAP)
    }

    fn zeros_like(&self) -> Self {
        TruncatedTensor {
            dim: self.dim,
            level: self.level,
            levels: self.levels.iter().map(|l| vec![0.0; l.len()]).collect(),
        }
    }

    /// The multiplicative unit: 1 at the empty word, 0 elsewhere.
    pub fn unit(dim: usize, level: usize) -> Result<Self, TensorError> {
        let mut t = Self::zeros(dim, level)?;
        t.levels[0][0] = 1.0;
        Ok(t)
    }

    /// Embeds a vector of ℝ^D as a level-1 element (a Lie-algebra primitive).
    pub fn from_level_one(coords: &[f64], level: usize) -> Result<Self, TensorError> {
        let mut t = Self::zeros(coords.len(), level)?;
        t.levels[1].copy_from_slice(coords);
        Ok(t)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn level(&self) -> usize {
        self.level
    }

    /// The raw coefficient array of one level.
    pub fn level_slice(&self, n: usize) -> &[f64] {
        &self.levels[n]
    }

    pub fn scalar(&self) -> f64 {
        self.levels[0][0]
    }

    /// The pairing ⟨T, e_w⟩.
    pub fn coefficient(&self, w: &Word) -> Result<f64, TensorError> {
        if w.len() > self.level {
            return Err(TensorError::WordTooLong {
                len: w.len(),
                level: self.level,
            });
        }
        if let Some(&bad) = w.letters().iter().find(|&&l| l == 0 || l > self.dim) {
            return Err(TensorError::LetterOutOfRange {
                letter: bad,
                dim: self.dim,
            });
        }
        Ok(self.levels[w.len()][w.index(self.dim)])
    }

    fn check_shape(&self, other: &Self) -> Result<(), TensorError> {
        if self.dim != other.dim || self.level != other.level {
            return Err(TensorError::ShapeMismatch {
                dim_a: self.dim,
                level_a: self.level,
                dim_b: other.dim,
                level_b: other.level,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, TensorError> {
        self.check_shape(other)?;
        let mut out = self.clone();
        for (a, b) in out.levels.iter_mut().zip(&other.levels) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, TensorError> {
        self.check_shape(other)?;
        let mut out = self.clone();
        for (a, b) in out.levels.iter_mut().zip(&other.levels) {
            for (x, y) in a.iter_mut().zip(b) {
                *x -= y;
            }
        }
        Ok(out)
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for l in &mut out.levels {
            for x in l.iter_mut() {
                *x *= factor;
            }
        }
        out
    }

    /// Concatenation (tensor) product: the level-n coefficient of the result
    /// at word w is Σ over splits w = uv of ⟨a, e_u⟩·⟨b, e_v⟩. Levels that
    /// are identically zero on either side are skipped; exponentials of
    /// primitives and graded elements hit that path constantly.
    pub fn product(&self, other: &Self) -> Result<Self, TensorError> {
        self.check_shape(other)?;
        let live_a: Vec<bool> = self.levels.iter().map(|l| l.iter().any(|x| *x != 0.0)).collect();
        let live_b: Vec<bool> = other.levels.iter().map(|l| l.iter().any(|x| *x != 0.0)).collect();
        let mut out = self.zeros_like();
        #[allow(clippy::needless_range_loop)]
        for n in 0..=self.level {
            // Split level n as p + q; index of uv is idx(u)·D^q + idx(v).
            for p in 0..=n {
                let q = n - p;
                if !live_a[p] || !live_b[q] {
                    continue;
                }
                let a = &self.levels[p];
                let b = &other.levels[q];
                let dst = &mut out.levels[n];
                for (iu, &av) in a.iter().enumerate() {
                    if av == 0.0 {
                        continue;
                    }
                    let base = iu * b.len();
                    for (d, &bv) in dst[base..base + b.len()].iter_mut().zip(b) {
                        *d += av * bv;
                    }
                }
            }
        }
        Ok(out)
    }

    fn fill_zero(&mut self) {
        for l in &mut self.levels {
            l.fill(0.0);
        }
    }

    /// [`TruncatedTensor::product`] into a reused output buffer; the
    /// signature hot loop calls this thousands of times and must not
    /// reallocate the (large) dense levels every step.
    pub(crate) fn product_into(&self, other: &Self, out: &mut Self) {
        debug_assert!(self.dim == other.dim && self.dim == out.dim);
        debug_assert!(self.level == other.level && self.level == out.level);
        let live_a: Vec<bool> = self.levels.iter().map(|l| l.iter().any(|x| *x != 0.0)).collect();
        let live_b: Vec<bool> = other.levels.iter().map(|l| l.iter().any(|x| *x != 0.0)).collect();
        out.fill_zero();
        #[allow(clippy::needless_range_loop)]
        for n in 0..=self.level {
            for p in 0..=n {
                let q = n - p;
                if !live_a[p] || !live_b[q] {
                    continue;
                }
                let a = &self.levels[p];
                let b = &other.levels[q];
                let dst = &mut out.levels[n];
                for (iu, &av) in a.iter().enumerate() {
                    if av == 0.0 {
                        continue;
                    }
                    let base = iu * b.len();
                    for (d, &bv) in dst[base..base + b.len()].iter_mut().zip(b) {
                        *d += av * bv;
                    }
                }
            }
        }
    }

    /// Overwrites `self` with exp_⊗(scale · coords) for a level-1 primitive:
    /// level n is the scaled outer power divided by n!. Same series as
    /// [`TruncatedTensor::exp`], specialized to avoid intermediate tensors.
    pub(crate) fn set_primitive_exp(&mut self, coords: &[f64], scale: f64) {
        debug_assert_eq!(coords.len(), self.dim);
        self.fill_zero();
        self.levels[0][0] = 1.0;
        for (dst, &c) in self.levels[1].iter_mut().zip(coords) {
            *dst = scale * c;
        }
        for n in 2..=self.level {
            let (lower, upper) = self.levels.split_at_mut(n);
            let prev = &lower[n - 1];
            let scaled = &lower[1];
            let dst = &mut upper[0];
            let inv = 1.0 / n as f64;
            for (iu, &pv) in prev.iter().enumerate() {
                if pv == 0.0 {
                    continue;
                }
                let base = iu * self.dim;
                for (d, &sc) in dst[base..base + self.dim].iter_mut().zip(scaled) {
                    *d = pv * sc * inv;
                }
            }
        }
    }

    /// Truncated exponential Σ_{k=0}^{N} x^⊗k / k!, defined for elements
    /// with zero scalar part.
    pub fn exp(&self) -> Result<Self, TensorError> {
        if self.scalar().abs() > 1e-12 {
            return Err(TensorError::NonzeroScalarPart { got: self.scalar() });
        }
        let mut acc = Self::unit(self.dim, self.level)?;
        let mut term = Self::unit(self.dim, self.level)?;
        for k in 1..=self.level {
            term = term.product(self)?.scale(1.0 / k as f64);
            acc = acc.add(&term)?;
        }
        Ok(acc)
    }

    /// Truncated logarithm Σ_{n=1}^{N} (−1)^{n+1} (g − 1)^⊗n / n, defined for
    /// elements with scalar part 1. Exact inverse of [`TruncatedTensor::exp`]
    /// within the truncation.
    pub fn log(&self) -> Result<Self, TensorError> {
        if (self.scalar() - 1.0).abs() > 1e-12 {
            return Err(TensorError::BadScalarPart { got: self.scalar() });
        }
        let mut x = self.clone();
        x.levels[0][0] = 0.0; // x = g − 1
        let mut acc = self.zeros_like();
        let mut power = Self::unit(self.dim, self.level)?;
        for n in 1..=self.level {
            power = power.product(&x)?;
            let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
            acc = acc.add(&power.scale(sign / n as f64))?;
        }
        Ok(acc)
    }

    /// Group inverse for elements with scalar part 1, via the geometric
    /// series (1 − x)⁻¹ = Σ x^⊗n with x = 1 − g.
    pub fn group_inverse(&self) -> Result<Self, TensorError> {
        if (self.scalar() - 1.0).abs() > 1e-12 {
            return Err(TensorError::BadScalarPart { got: self.scalar() });
        }
        let unit = Self::unit(self.dim, self.level)?;
        let x = unit.sub(self)?;
        let mut acc = unit.clone();
        let mut power = unit;
        for _ in 1..=self.level {
            power = power.product(&x)?;
            acc = acc.add(&power)?;
        }
        Ok(acc)
    }

    /// Euclidean norm over the coefficients of levels 1..=N; the scalar
    /// entry is included only when `include_scalar` is set.
    pub fn norm(&self, include_scalar: bool) -> f64 {
        let mut acc = 0.0;
        for (n, level) in self.levels.iter().enumerate() {
            if n == 0 && !include_scalar {
                continue;
            }
            for x in level {
                acc += x * x;
            }
        }
        acc.sqrt()
    }

    /// Euclidean norm with one scale factor per level (levels 1..=N).
    pub fn weighted_norm(&self, level_weights: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (n, level) in self.levels.iter().enumerate().skip(1) {
            let w = level_weights.get(n - 1).copied().unwrap_or(1.0);
            for x in level {
                acc += w * w * x * x;
            }
        }
        acc.sqrt()
    }

    /// Largest absolute coefficient at one level.
    pub fn level_max_abs(&self, n: usize) -> f64 {
        self.levels[n].iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// Maximum violation of the shuffle identities that characterize
    /// group-like elements: over letter pairs,
    /// `⟨g,e_i⟩⟨g,e_j⟩ − ⟨g,e_ij⟩ − ⟨g,e_ji⟩`, and for N ≥ 3 additionally the
    /// letter × 2-word shuffles
    /// `⟨g,e_i⟩⟨g,e_jk⟩ − ⟨g,e_ijk⟩ − ⟨g,e_jik⟩ − ⟨g,e_jki⟩`.
    /// Signatures satisfy these to numerical precision.
    pub fn shuffle_check(&self) -> f64 {
        assert!(self.level >= 2, "shuffle_check needs truncation level >= 2");
        let d = self.dim;
        let l1 = &self.levels[1];
        let l2 = &self.levels[2];
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let v = l1[i] * l1[j] - l2[i * d + j] - l2[j * d + i];
                worst = worst.max(v.abs());
            }
        }
        if self.level >= 3 {
            let l3 = &self.levels[3];
            for i in 0..d {
                for j in 0..d {
                    for k in 0..d {
                        let lhs = l1[i] * l2[j * d + k];
                        let rhs = l3[(i * d + j) * d + k]
                            + l3[(j * d + i) * d + k]
                            + l3[(j * d + k) * d + i];
                        worst = worst.max((lhs - rhs).abs());
                    }
                }
            }
        }
        worst
    }
}
