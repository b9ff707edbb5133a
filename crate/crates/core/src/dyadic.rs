//! Exact binary-digit machinery for uniform [0,1] samples.
//!
//! A uniform sample is represented by its lazily materialized bit stream
//! rather than a fixed-precision float: the joint-bit event search needs
//! bit indices up to `K_bound(nu) = ceil(2^(nu+1) * ln(nu+1))`, which
//! exceeds any fixed mantissa already for moderate `nu`. Bits are drawn
//! iid Bernoulli(1/2) on demand from a ChaCha8 generator keyed by the seed.

use num_bigint::BigUint;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CoreError, Result};

/// Largest supported sample count for the joint-bit event search.
///
/// Keeps `K_bound` comfortably inside 64 bits and the total bit storage
/// `nu * K_bound(nu)` under [`MAX_TOTAL_BITS`].
pub const NU_CAP: u32 = 24;

/// Bit-storage budget for a single joint-bit search (packed, in bits).
pub const MAX_TOTAL_BITS: u64 = 1 << 33;

/// Largest exponent accepted when building exact dyadic witnesses.
pub const SHATTER_CAP: u32 = 20;

/// Lazily materialized exact binary expansion of a uniform [0,1] sample.
///
/// Bit `k` (1-based) is fixed once drawn; re-reading returns the same value.
/// Two streams with the same seed produce identical bit sequences.
pub struct BitStream {
    seed: u64,
    rng: ChaCha8Rng,
    words: Vec<u64>,
}

impl BitStream {
    pub fn new(seed: u64) -> Self {
        BitStream {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            words: Vec::new(),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of bits materialized so far.
    pub fn materialized(&self) -> u64 {
        (self.words.len() as u64) * 64
    }

    fn materialize_words(&mut self, n: usize) {
        while self.words.len() < n {
            self.words.push(self.rng.next_u64());
        }
    }

    /// The k-th binary digit, k >= 1.
    pub fn bit(&mut self, k: u64) -> Result<u8> {
        if k == 0 {
            return Err(CoreError::Domain("bit index must be >= 1".into()));
        }
        let idx = k - 1;
        let word = (idx / 64) as usize;
        self.materialize_words(word + 1);
        Ok(((self.words[word] >> (idx % 64)) & 1) as u8)
    }
}

/// Exact dyadic rational `numerator / 2^exponent` in [0,1).
///
/// Canonical form keeps the numerator odd (or zero), matching the
/// terminating-zeros convention for binary expansions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DyadicRational {
    num: BigUint,
    exp: u64,
}

impl DyadicRational {
    pub fn new(num: BigUint, exp: u64) -> Result<Self> {
        if num.bits() > exp {
            return Err(CoreError::Domain(format!(
                "dyadic value {num}/2^{exp} is not in [0,1)"
            )));
        }
        let mut d = DyadicRational { num, exp };
        d.canonicalize();
        Ok(d)
    }

    /// Build from small integers, e.g. `from_parts(5, 3)` is 5/8.
    pub fn from_parts(num: u64, exp: u64) -> Result<Self> {
        Self::new(BigUint::from(num), exp)
    }

    /// Build from the leading bits of a binary expansion (bit 1 first).
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        let mut num = BigUint::default();
        for &b in bits {
            if b > 1 {
                return Err(CoreError::Domain("bits must be 0 or 1".into()));
            }
            num = (num << 1u8) + b;
        }
        Self::new(num, bits.len() as u64)
    }

    fn canonicalize(&mut self) {
        use num_integer::Integer;
        if self.num == BigUint::default() {
            self.exp = 0;
            return;
        }
        while self.num.is_even() && self.exp > 0 {
            self.num >>= 1u8;
            self.exp -= 1;
        }
    }

    pub fn numerator(&self) -> &BigUint {
        &self.num
    }

    pub fn exponent(&self) -> u64 {
        self.exp
    }

    /// The k-th binary digit under the terminating-zeros convention, k >= 1.
    pub fn bit(&self, k: u64) -> Result<u8> {
        if k == 0 {
            return Err(CoreError::Domain("bit index must be >= 1".into()));
        }
        if k > self.exp {
            // Terminating zeros past the last stored digit.
            return Ok(0);
        }
        Ok(((&self.num >> (self.exp - k)) & BigUint::from(1u8))
            .try_into()
            .unwrap_or(0u8))
    }

    pub fn to_f64(&self) -> f64 {
        // Keep only the top 64 significant bits; enough for display.
        let bits = self.num.bits();
        if bits == 0 {
            return 0.0;
        }
        let shift = bits.saturating_sub(64);
        let top: u64 = (&self.num >> shift).try_into().unwrap_or(u64::MAX);
        (top as f64) * 2f64.powi(shift as i32 - self.exp as i32)
    }
}

impl std::fmt::Display for DyadicRational {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/2^{}", self.num, self.exp)
    }
}

/// The partial sum of the binary expansion of a stream up to bit `k_max`.
///
/// The returned value `v` satisfies `v <= xi < v + 2^-k_max` for the
/// infinite expansion `xi`.
pub fn expansion_partial_sum(stream: &mut BitStream, k_max: u64) -> Result<DyadicRational> {
    if k_max == 0 {
        return Err(CoreError::Domain("k_max must be >= 1".into()));
    }
    let mut num = BigUint::default();
    for k in 1..=k_max {
        num = (num << 1u8) + stream.bit(k)?;
    }
    DyadicRational::new(num, k_max)
}

// ---------------------------------------------------------------------------
// K_bound with a verified ceiling.
// ---------------------------------------------------------------------------

const LN_FRAC_BITS: u32 = 128;

/// Interval enclosure of `atanh(p/q) * 2^LN_FRAC_BITS` for 0 < p < q.
fn atanh_fixed(p: u64, q: u64) -> (BigUint, BigUint) {
    let scale = BigUint::from(1u8) << LN_FRAC_BITS;
    let p = BigUint::from(p);
    let q = BigUint::from(q);
    let p2 = &p * &p;
    let q2 = &q * &q;
    let mut num = p.clone(); // p^(2j+1)
    let mut den = q.clone(); // q^(2j+1)
    let mut lo = BigUint::default();
    let mut terms: u64 = 0;
    let mut j: u64 = 0;
    loop {
        let term = (&scale * &num) / (&den * BigUint::from(2 * j + 1));
        if term == BigUint::default() {
            break;
        }
        lo += term;
        terms += 1;
        num *= &p2;
        den *= &q2;
        j += 1;
    }
    // Geometric tail bound: sum_{i>=j} (p/q)^(2i+1) <= (p/q)^(2j+1) * q^2/(q^2-p^2).
    let tail = (&scale * &num * &q2) / (&den * (&q2 - &p2)) + BigUint::from(1u8);
    // Each floored term under-counts by less than one ulp.
    let hi = &lo + BigUint::from(terms) + tail;
    (lo, hi)
}

/// Interval enclosure of `ln(n) * 2^LN_FRAC_BITS` for n >= 2.
fn ln_fixed(n: u64) -> (BigUint, BigUint) {
    let a = 63 - n.leading_zeros() as u64; // floor(log2 n)
    let pow = 1u64 << a;
    let (l2_lo, l2_hi) = atanh_fixed(1, 3); // ln 2 = 2 atanh(1/3)
    let (mut lo, mut hi) = (l2_lo * 2u8 * a, l2_hi * 2u8 * a);
    if n != pow {
        // ln(n/2^a) = 2 atanh((n - 2^a)/(n + 2^a))
        let (m_lo, m_hi) = atanh_fixed(n - pow, n + pow);
        lo += m_lo * 2u8;
        hi += m_hi * 2u8;
    }
    (lo, hi)
}

/// `ceil(2^(nu+1) * ln(nu+1))` with the ceiling certified by interval
/// bounds on the logarithm; `ln` here is the natural logarithm, as required
/// by the failure-probability bound `exp(-2^-nu * K) <= 1/(nu+1)^2`.
pub fn k_bound(nu: u32) -> Result<u64> {
    if nu == 0 {
        return Err(CoreError::Domain("nu must be >= 1".into()));
    }
    if nu > NU_CAP {
        return Err(CoreError::Capacity(format!(
            "nu = {nu} exceeds cap {NU_CAP}; K_bound would need {:.3e} bits per sample",
            2f64.powi(nu as i32 + 1) * ((nu + 1) as f64).ln()
        )));
    }
    let (lo, hi) = ln_fixed(nu as u64 + 1);
    let shift = nu + 1;
    let ceil_of = |v: BigUint| -> BigUint {
        let scaled = v << shift;
        let int = &scaled >> LN_FRAC_BITS;
        if (&int << LN_FRAC_BITS) == scaled {
            int
        } else {
            int + BigUint::from(1u8)
        }
    };
    let c_lo = ceil_of(lo);
    let c_hi = ceil_of(hi);
    if c_lo != c_hi {
        return Err(CoreError::Capacity(
            "K_bound interval too wide to certify the ceiling".into(),
        ));
    }
    c_lo.try_into()
        .map_err(|_| CoreError::Capacity("K_bound does not fit in 64 bits".into()))
}

// ---------------------------------------------------------------------------
// Joint-bit event finder and shattering witnesses.
// ---------------------------------------------------------------------------

/// The smallest `k <= k_max` with `bit_k = 1` for every stream, if any.
///
/// Absence is a valid outcome: it mirrors the failure event whose
/// probability is at most `1/(nu+1)^2` when `k_max = K_bound(nu)`.
pub fn find_joint_one_bit(streams: &mut [BitStream], k_max: u64) -> Result<Option<u64>> {
    if streams.is_empty() {
        return Err(CoreError::Domain("need at least one stream".into()));
    }
    if k_max == 0 {
        return Err(CoreError::Domain("k_max must be >= 1".into()));
    }
    let budget = (streams.len() as u64).saturating_mul(k_max);
    if budget > MAX_TOTAL_BITS {
        return Err(CoreError::Capacity(format!(
            "joint-bit search would materialize up to {budget} bits (budget {MAX_TOTAL_BITS})"
        )));
    }
    for k in 1..=k_max {
        let mut all_one = true;
        for s in streams.iter_mut() {
            if s.bit(k)? == 0 {
                all_one = false;
                break;
            }
        }
        if all_one {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

/// One joint-bit trial: draw `nu` streams from the trial seed and search
/// up to `K_bound(nu)`. Returns the event index, if found.
pub fn joint_bit_trial(nu: u32, trial_seed: u64) -> Result<Option<u64>> {
    let k_max = k_bound(nu)?;
    let mut streams: Vec<BitStream> = (0..nu as u64)
        .map(|i| BitStream::new(crate::seeding::split_seed(trial_seed, i)))
        .collect();
    find_joint_one_bit(&mut streams, k_max)
}

/// Exact dyadic samples whose leading `2^n` bits jointly realize all `2^n`
/// bit patterns across the sample set.
///
/// Pattern enumeration is lexicographic: pattern `k` (1-based) is the
/// binary expansion of `k - 1` over `n` digits, most significant first, and
/// sample `i` receives digit `i` of each pattern: `xi_i = sum_k 2^-k b^k_i`.
pub fn shatter_witness(n: u32) -> Result<Vec<DyadicRational>> {
    if n == 0 {
        return Err(CoreError::Domain("n must be >= 1".into()));
    }
    if n > SHATTER_CAP {
        return Err(CoreError::Capacity(format!(
            "n = {n} needs 2^{n}-bit numerators (cap {SHATTER_CAP})"
        )));
    }
    let total = 1u64 << n;
    let mut out = Vec::with_capacity(n as usize);
    for i in 1..=n as u64 {
        let mut num = BigUint::default();
        for k in 1..=total {
            let pattern = k - 1;
            let b = (pattern >> (n as u64 - i)) & 1;
            num = (num << 1u8) + BigUint::from(b);
        }
        out.push(DyadicRational::new(num, total)?);
    }
    Ok(out)
}
