//! The finite field F_q, q = p^m, as a ring object, together with a cached
//! kernel for the carry arithmetic of Teichmüller sums.
//!
//! Elements are polynomials over F_p modulo a fixed irreducible, encoded as
//! `u64` (base-p digit packing) for cheap hashing. The field is perfect:
//! Frobenius x -> x^p is inverted by x -> x^(p^(m-1)).

use std::collections::HashMap;
use std::sync::Mutex;

use num_bigint::BigInt;

use crate::ring::{IntPolyQuot, Ring, WittCoeffs};

/// Element of F_q in packed form: digit i (mod-p coefficient of x^i) sits at
/// base-p position i.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct FqElem(pub u64);

/// The field F_{p^m}, with the monic irreducible fixed at construction.
#[derive(Debug)]
pub struct Fq {
    pub p: u64,
    pub m: usize,
    /// Monic irreducible over F_p, coefficients low to high, length m+1.
    modulus: Vec<u64>,
    lift: IntPolyQuot,
    /// Memoized transition: (packed Witt state, added Teichmüller scalar,
    /// state length) -> new packed state. States are Witt vectors over F_q.
    teich_cache: Mutex<HashMap<(u64, u64, u8), u64>>,
}

impl Fq {
    /// The prime field F_p.
    pub fn prime_field(p: u64) -> Self {
        Fq::with_modulus(p, vec![0, 1])
    }

    /// F_{p^m} with the lexicographically first monic irreducible of degree m.
    pub fn new(p: u64, m: usize) -> Self {
        assert!(m >= 1);
        if m == 1 {
            return Fq::prime_field(p);
        }
        let modulus = first_irreducible(p, m);
        Fq::with_modulus(p, modulus)
    }

    pub fn with_modulus(p: u64, modulus: Vec<u64>) -> Self {
        assert!(p >= 2);
        let m = modulus.len() - 1;
        assert_eq!(modulus[m], 1, "modulus must be monic");
        assert!(p.pow(m as u32) < (1 << 20), "field too large for packing");
        let lift = IntPolyQuot::new(
            modulus
                .iter()
                .map(|&c| BigInt::from(c as i64))
                .collect::<Vec<_>>(),
        );
        Fq {
            p,
            m,
            modulus,
            lift,
            teich_cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn q(&self) -> u64 {
        self.p.pow(self.m as u32)
    }

    fn unpack(&self, a: FqElem) -> Vec<u64> {
        let mut v = vec![0u64; self.m];
        let mut x = a.0;
        for c in v.iter_mut() {
            *c = x % self.p;
            x /= self.p;
        }
        v
    }

    fn pack(&self, v: &[u64]) -> FqElem {
        let mut x = 0u64;
        for &c in v.iter().rev() {
            x = x * self.p + (c % self.p);
        }
        FqElem(x)
    }

    /// Embed a mod-p integer.
    pub fn from_u64(&self, c: u64) -> FqElem {
        FqElem(c % self.p)
    }

    pub fn elem_from_i64(&self, c: i64) -> FqElem {
        FqElem(c.rem_euclid(self.p as i64) as u64)
    }

    /// All field elements in packed order, for exhaustive enumeration.
    pub fn all_elems(&self) -> impl Iterator<Item = FqElem> + '_ {
        (0..self.q()).map(FqElem)
    }

    pub fn frobenius(&self, a: FqElem) -> FqElem {
        self.pow(&a, self.p)
    }

    /// Inverse of Frobenius: the p^(m-1)-th power.
    pub fn inv_frobenius(&self, a: FqElem) -> FqElem {
        self.pow(&a, self.p.pow(self.m as u32 - 1))
    }

    /// p^i-th root, i.e. the i-fold inverse Frobenius.
    pub fn root_p(&self, a: FqElem, i: usize) -> FqElem {
        let mut x = a;
        for _ in 0..i {
            x = self.inv_frobenius(x);
        }
        x
    }

    /// Multiplicative inverse of a nonzero element.
    pub fn inv(&self, a: FqElem) -> FqElem {
        assert!(a.0 != 0, "inverse of zero");
        self.pow(&a, self.q() - 2)
    }

    /// A fresh copy of the integral lift ring (for polynomial plugins).
    pub fn lift_ring_clone(&self) -> IntPolyQuot {
        self.lift.clone()
    }

    /// Digit vector (low-to-high) of the canonical integer lift, used by the
    /// Witt coefficient plugin.
    pub(crate) fn lift_digits(&self, a: FqElem) -> Vec<BigInt> {
        self.unpack(a).into_iter().map(BigInt::from).collect()
    }

    /// Witt-vector reduction mod p applied to a lift-ring element.
    pub(crate) fn reduce_digits(&self, v: &[BigInt]) -> FqElem {
        let p = BigInt::from(self.p);
        let digits: Vec<u64> = v
            .iter()
            .map(|c| {
                let r = ((c % &p) + &p) % &p;
                let r: u64 = r.try_into().unwrap();
                r
            })
            .collect();
        self.pack(&digits)
    }

    /// Adds the Teichmüller lift of `c` to the packed Witt-vector state of
    /// length `len`, memoizing the transition. This is the arithmetic kernel
    /// behind the digitwise carry functions of Witt sums.
    pub(crate) fn teich_add(&self, state: u64, c: FqElem, len: usize) -> u64 {
        if c.0 == 0 {
            return state;
        }
        let key = (state, c.0, len as u8);
        if let Some(&hit) = self.teich_cache.lock().unwrap().get(&key) {
            return hit;
        }
        let a = self.unpack_state(state, len);
        let mut b = vec![self.zero(); len];
        b[0] = c;
        let sum = crate::witt::witt_add(
            self.p,
            self,
            &crate::witt::WittVector::new(a),
            &crate::witt::WittVector::new(b),
        );
        let packed = self.pack_state(sum.coeffs());
        self.teich_cache.lock().unwrap().insert(key, packed);
        packed
    }

    pub(crate) fn unpack_state(&self, state: u64, len: usize) -> Vec<FqElem> {
        let q = self.q();
        let mut v = Vec::with_capacity(len);
        let mut x = state;
        for _ in 0..len {
            v.push(FqElem(x % q));
            x /= q;
        }
        v
    }

    pub(crate) fn pack_state(&self, v: &[FqElem]) -> u64 {
        let q = self.q();
        let mut x = 0u64;
        for e in v.iter().rev() {
            x = x * q + e.0;
        }
        x
    }

    /// Witt sum of the Teichmüller lifts of `terms`, returned as the list of
    /// p-adic digits: terms sum to [d_0] + [d_1] p + ... + [d_(len-1)] p^(len-1).
    pub fn teich_sum_digits(&self, terms: impl IntoIterator<Item = FqElem>, len: usize) -> Vec<FqElem> {
        let mut state = 0u64;
        for t in terms {
            state = self.teich_add(state, t, len);
        }
        let comps = self.unpack_state(state, len);
        comps
            .into_iter()
            .enumerate()
            .map(|(i, w)| self.root_p(w, i))
            .collect()
    }
}

impl Ring for Fq {
    type Elem = FqElem;

    fn zero(&self) -> FqElem {
        FqElem(0)
    }
    fn one(&self) -> FqElem {
        FqElem(1)
    }
    fn add(&self, a: &FqElem, b: &FqElem) -> FqElem {
        let va = self.unpack(*a);
        let vb = self.unpack(*b);
        let v: Vec<u64> = va.iter().zip(&vb).map(|(x, y)| (x + y) % self.p).collect();
        self.pack(&v)
    }
    fn neg(&self, a: &FqElem) -> FqElem {
        let v: Vec<u64> = self.unpack(*a).iter().map(|x| (self.p - x) % self.p).collect();
        self.pack(&v)
    }
    fn mul(&self, a: &FqElem, b: &FqElem) -> FqElem {
        let va = self.unpack(*a);
        let vb = self.unpack(*b);
        let mut prod = vec![0u64; 2 * self.m - 1];
        for (i, x) in va.iter().enumerate() {
            for (j, y) in vb.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % self.p;
            }
        }
        // Fold down by the monic modulus.
        for k in (self.m..prod.len()).rev() {
            let top = prod[k];
            if top != 0 {
                prod[k] = 0;
                for i in 0..self.m {
                    let sub = (top * self.modulus[i]) % self.p;
                    let idx = k - self.m + i;
                    prod[idx] = (prod[idx] + self.p - sub) % self.p;
                }
            }
        }
        prod.truncate(self.m);
        self.pack(&prod)
    }
    fn from_i64(&self, n: i64) -> FqElem {
        self.elem_from_i64(n)
    }
}

impl WittCoeffs for Fq {
    type Lift = IntPolyQuot;

    fn lift_ring(&self) -> &IntPolyQuot {
        &self.lift
    }
    fn lift(&self, a: &FqElem) -> Vec<BigInt> {
        self.lift_digits(*a)
    }
    fn reduce(&self, a: &Vec<BigInt>) -> FqElem {
        self.reduce_digits(a)
    }
}

/// Lexicographically first monic irreducible of degree m over F_p, found by
/// trial division against all monic factors of degree <= m/2.
fn first_irreducible(p: u64, m: usize) -> Vec<u64> {
    let total = p.pow(m as u32);
    'cand: for code in 0..total {
        let mut poly = vec![0u64; m + 1];
        let mut x = code;
        for c in poly.iter_mut().take(m) {
            *c = x % p;
            x /= p;
        }
        poly[m] = 1;
        for d in 1..=m / 2 {
            let dt = p.pow(d as u32);
            for fc in 0..dt {
                let mut f = vec![0u64; d + 1];
                let mut y = fc;
                for c in f.iter_mut().take(d) {
                    *c = y % p;
                    y /= p;
                }
                f[d] = 1;
                if poly_divides(p, &f, &poly) {
                    continue 'cand;
                }
            }
        }
        return poly;
    }
    unreachable!("no irreducible found");
}

fn poly_divides(p: u64, f: &[u64], g: &[u64]) -> bool {
    // Remainder of g by monic f over F_p; divides iff remainder is zero.
    let mut r: Vec<u64> = g.to_vec();
    let df = f.len() - 1;
    while r.len() > df {
        let top = *r.last().unwrap();
        let k = r.len() - 1 - df;
        if top != 0 {
            for i in 0..=df {
                r[k + i] = (r[k + i] + (p - (top * f[i]) % p)) % p;
            }
        }
        r.pop();
    }
    r.iter().all(|&c| c == 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f9_modulus_is_irreducible_and_frobenius_inverts() {
        let f9 = Fq::new(3, 2);
        assert_eq!(f9.q(), 9);
        for a in f9.all_elems() {
            assert_eq!(f9.inv_frobenius(f9.frobenius(a)), a);
            assert_eq!(f9.frobenius(f9.inv_frobenius(a)), a);
        }
    }

    #[test]
    fn field_axioms_small() {
        let f9 = Fq::new(3, 2);
        for a in f9.all_elems() {
            for b in f9.all_elems() {
                assert_eq!(f9.mul(&a, &b), f9.mul(&b, &a));
                if a.0 != 0 {
                    let inv = f9.inv(a);
                    assert_eq!(f9.mul(&a, &inv), f9.one());
                }
                let _ = b;
            }
        }
    }

    #[test]
    fn prime_field_matches_mod_p() {
        let f3 = Fq::prime_field(3);
        assert_eq!(f3.add(&FqElem(2), &FqElem(2)), FqElem(1));
        assert_eq!(f3.mul(&FqElem(2), &FqElem(2)), FqElem(1));
        assert_eq!(f3.neg(&FqElem(1)), FqElem(2));
    }
}
