//! Exact Laurent polynomials over a ring object, with an optional precision
//! cap meaning "known modulo u^P".
//!
//! Values are normalized: the stored coefficient at `min_deg` is nonzero
//! unless the value is zero (empty coefficient list), and stored degrees lie
//! below the precision cap. Exact values (no cap) behave as known to all
//! orders.

use crate::ring::Ring;

pub struct LaurentPoly<R: Ring> {
    min_deg: i64,
    coeffs: Vec<R::Elem>,
    prec: Option<i64>,
}

// Manual impls: the derive would demand R: Clone/Debug, but only the element
// type matters.
impl<R: Ring> Clone for LaurentPoly<R> {
    fn clone(&self) -> Self {
        LaurentPoly { min_deg: self.min_deg, coeffs: self.coeffs.clone(), prec: self.prec }
    }
}

impl<R: Ring> std::fmt::Debug for LaurentPoly<R> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LaurentPoly")
            .field("min_deg", &self.min_deg)
            .field("coeffs", &self.coeffs)
            .field("prec", &self.prec)
            .finish()
    }
}

impl<R: Ring> PartialEq for LaurentPoly<R> {
    fn eq(&self, other: &Self) -> bool {
        // Normalized form: equality of stored data; the precision cap is
        // metadata and does not participate.
        self.min_deg == other.min_deg && self.coeffs == other.coeffs
            || (self.coeffs.is_empty() && other.coeffs.is_empty())
    }
}

impl<R: Ring> LaurentPoly<R> {
    pub fn zero() -> Self {
        LaurentPoly { min_deg: 0, coeffs: Vec::new(), prec: None }
    }

    pub fn zero_mod(prec: i64) -> Self {
        LaurentPoly { min_deg: 0, coeffs: Vec::new(), prec: Some(prec) }
    }

    pub fn from_coeffs(ring: &R, min_deg: i64, coeffs: Vec<R::Elem>) -> Self {
        Self::from_parts(ring, min_deg, coeffs, None)
    }

    pub fn from_parts(ring: &R, min_deg: i64, coeffs: Vec<R::Elem>, prec: Option<i64>) -> Self {
        let mut p = LaurentPoly { min_deg, coeffs, prec };
        p.normalize(ring);
        p
    }

    pub fn monomial(ring: &R, deg: i64, c: R::Elem) -> Self {
        Self::from_parts(ring, deg, vec![c], None)
    }

    pub fn constant(ring: &R, c: R::Elem) -> Self {
        Self::monomial(ring, 0, c)
    }

    fn normalize(&mut self, ring: &R) {
        if let Some(p) = self.prec {
            // Drop stored degrees at or above the cap.
            let keep = (p - self.min_deg).max(0) as usize;
            self.coeffs.truncate(keep.min(self.coeffs.len()));
        }
        while let Some(last) = self.coeffs.last() {
            if ring.is_zero(last) {
                self.coeffs.pop();
            } else {
                break;
            }
        }
        let lead = self.coeffs.iter().position(|c| !ring.is_zero(c));
        match lead {
            Some(0) => {}
            Some(k) => {
                self.coeffs.drain(0..k);
                self.min_deg += k as i64;
            }
            None => {
                self.coeffs.clear();
                self.min_deg = 0;
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// u-adic valuation; None for (exact or capped) zero.
    pub fn val(&self) -> Option<i64> {
        if self.is_zero() { None } else { Some(self.min_deg) }
    }

    /// Largest stored degree; None for zero.
    pub fn deg(&self) -> Option<i64> {
        if self.is_zero() { None } else { Some(self.min_deg + self.coeffs.len() as i64 - 1) }
    }

    pub fn precision(&self) -> Option<i64> {
        self.prec
    }

    pub fn coeff(&self, ring: &R, d: i64) -> R::Elem {
        if d < self.min_deg {
            return ring.zero();
        }
        let i = (d - self.min_deg) as usize;
        self.coeffs.get(i).cloned().unwrap_or_else(|| ring.zero())
    }

    /// Iterate (degree, coefficient) over stored nonzero coefficients.
    pub fn iter_terms<'a>(&'a self, ring: &'a R) -> impl Iterator<Item = (i64, &'a R::Elem)> + 'a {
        self.coeffs
            .iter()
            .enumerate()
            .filter(move |(_, c)| !ring.is_zero(c))
            .map(move |(i, c)| (self.min_deg + i as i64, c))
    }

    pub fn add(&self, ring: &R, other: &Self) -> Self {
        if self.is_zero() && self.prec.is_none() {
            return other.clone();
        }
        if other.is_zero() && other.prec.is_none() {
            return self.clone();
        }
        let prec = min_prec(self.prec, other.prec);
        let lo = self.min_deg.min(other.min_deg);
        let hi = (self.min_deg + self.coeffs.len() as i64).max(other.min_deg + other.coeffs.len() as i64);
        let mut coeffs = Vec::with_capacity((hi - lo).max(0) as usize);
        for d in lo..hi {
            coeffs.push(ring.add(&self.coeff(ring, d), &other.coeff(ring, d)));
        }
        Self::from_parts(ring, lo, coeffs, prec)
    }

    pub fn neg(&self, ring: &R) -> Self {
        LaurentPoly {
            min_deg: self.min_deg,
            coeffs: self.coeffs.iter().map(|c| ring.neg(c)).collect(),
            prec: self.prec,
        }
    }

    pub fn sub(&self, ring: &R, other: &Self) -> Self {
        self.add(ring, &other.neg(ring))
    }

    pub fn mul(&self, ring: &R, other: &Self) -> Self {
        if (self.is_zero() && self.prec.is_none()) || (other.is_zero() && other.prec.is_none()) {
            return Self::zero();
        }
        let prec = mul_prec(self, other);
        if self.is_zero() || other.is_zero() {
            return match prec {
                Some(p) => Self::zero_mod(p),
                None => Self::zero(),
            };
        }
        let lo = self.min_deg + other.min_deg;
        let n = self.coeffs.len() + other.coeffs.len() - 1;
        let mut coeffs = vec![ring.zero(); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if ring.is_zero(a) {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !ring.is_zero(b) {
                    coeffs[i + j] = ring.add(&coeffs[i + j], &ring.mul(a, b));
                }
            }
        }
        Self::from_parts(ring, lo, coeffs, prec)
    }

    /// Multiply by the monomial u^k (exact degree shift, always invertible).
    pub fn mul_monomial(&self, k: i64) -> Self {
        LaurentPoly {
            min_deg: self.min_deg + k,
            coeffs: self.coeffs.clone(),
            prec: self.prec.map(|p| p + k),
        }
    }

    pub fn scale(&self, ring: &R, c: &R::Elem) -> Self {
        let coeffs = self.coeffs.iter().map(|x| ring.mul(c, x)).collect();
        Self::from_parts(ring, self.min_deg, coeffs, self.prec)
    }

    /// Truncate to degrees < bound, recording the bound as precision.
    pub fn truncated(&self, ring: &R, bound: i64) -> Self {
        let prec = match self.prec {
            Some(p) => Some(p.min(bound)),
            None => Some(bound),
        };
        Self::from_parts(ring, self.min_deg, self.coeffs.clone(), prec)
    }

    /// Keep only degrees < bound without recording a precision cap (the
    /// discarded tail is known, just unwanted).
    pub fn low_part(&self, ring: &R, bound: i64) -> Self {
        let coeffs: Vec<R::Elem> = self
            .coeffs
            .iter()
            .enumerate()
            .take_while(|(i, _)| self.min_deg + (*i as i64) < bound)
            .map(|(_, c)| c.clone())
            .collect();
        Self::from_parts(ring, self.min_deg, coeffs, self.prec)
    }

    /// The part of degree >= bound, shifted down by u^bound.
    pub fn high_part_shifted(&self, ring: &R, bound: i64) -> Self {
        let coeffs: Vec<R::Elem> = self
            .coeffs
            .iter()
            .enumerate()
            .skip_while(|(i, _)| self.min_deg + (*i as i64) < bound)
            .map(|(_, c)| c.clone())
            .collect();
        let lo = self.min_deg.max(bound);
        Self::from_parts(ring, lo - bound, coeffs, self.prec.map(|p| p - bound))
    }

    /// Whether the value is congruent to 0 mod u^k. Errors when the cap is
    /// too small to decide.
    pub fn divisible_by_pow(&self, k: i64) -> crate::error::Result<bool> {
        if let Some(p) = self.prec {
            if p < k && self.deg().map_or(true, |d| d < k) {
                // All visible terms vanish but the tail is unknown.
                if self.val().map_or(true, |v| v >= k) {
                    return Err(crate::error::Error::PrecisionShortfall { needed: k, have: p });
                }
            }
        }
        Ok(self.val().map_or(true, |v| v >= k))
    }

    /// Exact equality as known quantities; errors if a cap hides the answer.
    pub fn congruent_mod_pow(&self, ring: &R, other: &Self, k: i64) -> crate::error::Result<bool> {
        self.sub(ring, other).divisible_by_pow(k)
    }
}

fn min_prec(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (Some(x), None) | (None, Some(x)) => Some(x),
        (None, None) => None,
    }
}

fn mul_prec<R: Ring>(a: &LaurentPoly<R>, b: &LaurentPoly<R>) -> Option<i64> {
    // a known mod u^Pa with val >= va: product known mod u^(min(Pa+vb, Pb+va)).
    // A capped zero has valuation at least its cap.
    let va = a.val().or(a.prec);
    let vb = b.val().or(b.prec);
    let pa = match (a.prec, vb) {
        (Some(p), Some(v)) => Some(p + v),
        _ => None,
    };
    let pb = match (b.prec, va) {
        (Some(p), Some(v)) => Some(p + v),
        _ => None,
    };
    min_prec(pa, pb)
}

/// Laurent polynomials over a base ring, as a ring object themselves. Used
/// to plug polynomial coefficient rings into the Witt machinery.
pub struct LaurentRing<R: Ring> {
    pub base: R,
}

impl<R: Ring> LaurentRing<R> {
    pub fn new(base: R) -> Self {
        LaurentRing { base }
    }
}

impl<R: Ring> Ring for LaurentRing<R> {
    type Elem = LaurentPoly<R>;

    fn zero(&self) -> LaurentPoly<R> {
        LaurentPoly::zero()
    }
    fn one(&self) -> LaurentPoly<R> {
        LaurentPoly::constant(&self.base, self.base.one())
    }
    fn add(&self, a: &LaurentPoly<R>, b: &LaurentPoly<R>) -> LaurentPoly<R> {
        a.add(&self.base, b)
    }
    fn neg(&self, a: &LaurentPoly<R>) -> LaurentPoly<R> {
        a.neg(&self.base)
    }
    fn mul(&self, a: &LaurentPoly<R>, b: &LaurentPoly<R>) -> LaurentPoly<R> {
        a.mul(&self.base, b)
    }
    fn from_i64(&self, n: i64) -> LaurentPoly<R> {
        LaurentPoly::constant(&self.base, self.base.from_i64(n))
    }
}

impl<R: crate::ring::GhostRing> crate::ring::GhostRing for LaurentRing<R> {
    fn mul_int(&self, a: &LaurentPoly<R>, k: &num_bigint::BigInt) -> LaurentPoly<R> {
        let coeffs = a.coeffs.iter().map(|c| self.base.mul_int(c, k)).collect();
        LaurentPoly::from_parts(&self.base, a.min_deg, coeffs, a.prec)
    }

    fn div_int_exact(
        &self,
        a: &LaurentPoly<R>,
        k: &num_bigint::BigInt,
    ) -> crate::error::Result<LaurentPoly<R>> {
        let coeffs = a
            .coeffs
            .iter()
            .map(|c| self.base.div_int_exact(c, k))
            .collect::<crate::error::Result<Vec<_>>>()?;
        Ok(LaurentPoly::from_parts(&self.base, a.min_deg, coeffs, a.prec))
    }
}

/// Power-series inverse over a field context, to `terms` stored coefficients
/// past the valuation. The result has a precision cap.
pub fn invert<R: Ring>(
    ring: &R,
    inv_elem: impl Fn(&R::Elem) -> R::Elem,
    a: &LaurentPoly<R>,
    terms: i64,
) -> LaurentPoly<R> {
    let v = a.val().expect("inverse of zero series");
    let lead = a.coeff(ring, v);
    let lead_inv = inv_elem(&lead);
    let mut out = vec![ring.zero(); terms as usize];
    out[0] = lead_inv.clone();
    for k in 1..terms {
        // coefficient of u^k in (a/u^v) * out must vanish
        let mut acc = ring.zero();
        for j in 0..k {
            let c = a.coeff(ring, v + (k - j));
            if !ring.is_zero(&c) {
                acc = ring.add(&acc, &ring.mul(&c, &out[j as usize]));
            }
        }
        out[k as usize] = ring.neg(&ring.mul(&lead_inv, &acc));
    }
    LaurentPoly::from_parts(ring, -v, out, Some(terms - v))
}
