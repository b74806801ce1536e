//! Ring-object traits and the integer lift rings used for ghost arithmetic.
//!
//! All algebra in this crate is generic over a *ring object*: a context value
//! implementing [`Ring`] whose associated `Elem` type carries the element
//! data. Contexts are cheap to share and elements are plain data, so values
//! stay immutable and thread-safe.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};

/// A commutative ring given as a context object.
pub trait Ring {
    type Elem: Clone + PartialEq + Debug;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(a, &self.neg(b))
    }

    fn is_zero(&self, a: &Self::Elem) -> bool {
        *a == self.zero()
    }

    fn from_i64(&self, n: i64) -> Self::Elem {
        let mut acc = self.zero();
        let one = self.one();
        for _ in 0..n.unsigned_abs() {
            acc = self.add(&acc, &one);
        }
        if n < 0 {
            acc = self.neg(&acc);
        }
        acc
    }

    fn pow(&self, a: &Self::Elem, e: u64) -> Self::Elem {
        let mut base = a.clone();
        let mut e = e;
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }
}

/// A ring in which multiplication by integers is injective enough for ghost
/// inversion: dividing by a power of `p` must be exact whenever the true
/// value is divisible.
pub trait GhostRing: Ring {
    fn mul_int(&self, a: &Self::Elem, k: &BigInt) -> Self::Elem;

    /// Exact division by `k`; errors if the element is not divisible.
    fn div_int_exact(&self, a: &Self::Elem, k: &BigInt) -> Result<Self::Elem>;
}

/// Coefficient ring plugin for Witt vectors: the ring itself, a torsion-free
/// lift ring where ghost inversion is exact, a set-theoretic section `lift`
/// of the ring-homomorphism `reduce`. The prime is passed to each Witt
/// operation explicitly, so the same plugin serves any p.
pub trait WittCoeffs: Ring {
    type Lift: GhostRing;

    fn lift_ring(&self) -> &Self::Lift;
    fn lift(&self, a: &Self::Elem) -> <Self::Lift as Ring>::Elem;
    fn reduce(&self, a: &<Self::Lift as Ring>::Elem) -> Self::Elem;
}

/// The ring of integers, its own ghost lift.
#[derive(Clone, Debug, Default)]
pub struct BigIntRing;

impl Ring for BigIntRing {
    type Elem = BigInt;

    fn zero(&self) -> BigInt {
        BigInt::zero()
    }
    fn one(&self) -> BigInt {
        BigInt::from(1)
    }
    fn add(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a + b
    }
    fn neg(&self, a: &BigInt) -> BigInt {
        -a
    }
    fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a * b
    }
    fn from_i64(&self, n: i64) -> BigInt {
        BigInt::from(n)
    }
}

impl GhostRing for BigIntRing {
    fn mul_int(&self, a: &BigInt, k: &BigInt) -> BigInt {
        a * k
    }

    fn div_int_exact(&self, a: &BigInt, k: &BigInt) -> Result<BigInt> {
        let (q, r) = num_integer::Integer::div_rem(a, k);
        if !r.is_zero() {
            return Err(Error::GhostDivision);
        }
        Ok(q)
    }
}

/// Witt coefficients taken in the integers themselves (lift = identity).
impl WittCoeffs for BigIntRing {
    type Lift = BigIntRing;

    fn lift_ring(&self) -> &BigIntRing {
        self
    }
    fn lift(&self, a: &BigInt) -> BigInt {
        a.clone()
    }
    fn reduce(&self, a: &BigInt) -> BigInt {
        a.clone()
    }
}

/// `Z[x]/(f)` for a monic integer polynomial `f`, with arbitrary-precision
/// coefficients. Free as a Z-module, hence torsion-free; this is the ghost
/// lift for finite fields and for the ramified quotient rings.
#[derive(Clone, Debug)]
pub struct IntPolyQuot {
    /// Monic modulus, coefficients low to high, length degree+1.
    modulus: Vec<BigInt>,
}

impl IntPolyQuot {
    pub fn new(modulus: Vec<BigInt>) -> Self {
        assert!(
            modulus.last().map(|c| c == &BigInt::from(1)).unwrap_or(false),
            "modulus must be monic"
        );
        assert!(modulus.len() >= 2, "modulus must have positive degree");
        IntPolyQuot { modulus }
    }

    pub fn degree(&self) -> usize {
        self.modulus.len() - 1
    }

    /// Reduce a polynomial of arbitrary degree modulo the monic modulus.
    fn reduce_poly(&self, mut v: Vec<BigInt>) -> Vec<BigInt> {
        let d = self.degree();
        while v.len() > d {
            let top = v.pop().unwrap();
            if !top.is_zero() {
                let k = v.len() - d;
                for i in 0..d {
                    let t = &self.modulus[i] * &top;
                    v[k + i] -= t;
                }
            }
        }
        v.resize(d, BigInt::zero());
        v
    }
}

impl Ring for IntPolyQuot {
    type Elem = Vec<BigInt>;

    fn zero(&self) -> Vec<BigInt> {
        vec![BigInt::zero(); self.degree()]
    }
    fn one(&self) -> Vec<BigInt> {
        let mut v = self.zero();
        v[0] = BigInt::from(1);
        v
    }
    fn add(&self, a: &Vec<BigInt>, b: &Vec<BigInt>) -> Vec<BigInt> {
        a.iter().zip(b).map(|(x, y)| x + y).collect()
    }
    fn neg(&self, a: &Vec<BigInt>) -> Vec<BigInt> {
        a.iter().map(|x| -x).collect()
    }
    fn mul(&self, a: &Vec<BigInt>, b: &Vec<BigInt>) -> Vec<BigInt> {
        let d = self.degree();
        let mut prod = vec![BigInt::zero(); 2 * d - 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if !y.is_zero() {
                    prod[i + j] += x * y;
                }
            }
        }
        self.reduce_poly(prod)
    }
    fn from_i64(&self, n: i64) -> Vec<BigInt> {
        let mut v = self.zero();
        v[0] = BigInt::from(n);
        v
    }
}

impl GhostRing for IntPolyQuot {
    fn mul_int(&self, a: &Vec<BigInt>, k: &BigInt) -> Vec<BigInt> {
        a.iter().map(|x| x * k).collect()
    }

    fn div_int_exact(&self, a: &Vec<BigInt>, k: &BigInt) -> Result<Vec<BigInt>> {
        let mut out = Vec::with_capacity(a.len());
        for x in a {
            let (q, r) = num_integer::Integer::div_rem(x, k);
            if !r.is_zero() {
                return Err(Error::GhostDivision);
            }
            out.push(q);
        }
        Ok(out)
    }
}

/// `Z[x]/(f, p^K)` with `i128` coefficients: a bounded-precision view of
/// [`IntPolyQuot`]. Exact divisions by `p^r` consume `r` digits of the
/// budget, so `K` must exceed the target p-precision by the total division
/// depth of one Witt operation.
#[derive(Clone, Debug)]
pub struct IntPolyQuotMod {
    modulus: Vec<i128>,
    pub p: u64,
    pub k: u32,
    pk: i128,
}

impl IntPolyQuotMod {
    pub fn new(modulus: Vec<i128>, p: u64, k: u32) -> Self {
        assert_eq!(*modulus.last().unwrap(), 1, "modulus must be monic");
        let pk = (p as i128).checked_pow(k).expect("p^K overflows i128");
        // Headroom so coefficient convolutions of reduced values cannot
        // overflow: e * pk^2 must fit in i128.
        let deg = modulus.len() - 1;
        assert!(pk < (i128::MAX / pk) / (deg as i128 + 1), "p^K too large");
        IntPolyQuotMod { modulus, p, k, pk }
    }

    fn degree(&self) -> usize {
        self.modulus.len() - 1
    }

    fn norm(&self, x: i128) -> i128 {
        x.rem_euclid(self.pk)
    }

    fn reduce_poly(&self, mut v: Vec<i128>) -> Vec<i128> {
        let d = self.degree();
        while v.len() > d {
            let top = v.pop().unwrap();
            if top != 0 {
                let k = v.len() - d;
                for i in 0..d {
                    v[k + i] = self.norm(v[k + i] - self.norm(self.modulus[i] * top));
                }
            }
        }
        v.resize(d, 0);
        v.iter_mut().for_each(|c| *c = self.norm(*c));
        v
    }
}

impl Ring for IntPolyQuotMod {
    type Elem = Vec<i128>;

    fn zero(&self) -> Vec<i128> {
        vec![0; self.degree()]
    }
    fn one(&self) -> Vec<i128> {
        let mut v = self.zero();
        v[0] = 1;
        v
    }
    fn add(&self, a: &Vec<i128>, b: &Vec<i128>) -> Vec<i128> {
        a.iter().zip(b).map(|(x, y)| self.norm(x + y)).collect()
    }
    fn neg(&self, a: &Vec<i128>) -> Vec<i128> {
        a.iter().map(|x| self.norm(-x)).collect()
    }
    fn mul(&self, a: &Vec<i128>, b: &Vec<i128>) -> Vec<i128> {
        let d = self.degree();
        let mut prod = vec![0i128; 2 * d - 1];
        for (i, x) in a.iter().enumerate() {
            if *x == 0 {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                prod[i + j] = self.norm(prod[i + j] + self.norm(x * y));
            }
        }
        self.reduce_poly(prod)
    }
    fn from_i64(&self, n: i64) -> Vec<i128> {
        let mut v = self.zero();
        v[0] = self.norm(n as i128);
        v
    }
}

impl GhostRing for IntPolyQuotMod {
    fn mul_int(&self, a: &Vec<i128>, k: &BigInt) -> Vec<i128> {
        let k = bigint_to_i128_mod(k, self.pk);
        a.iter().map(|x| self.norm(x * k)).collect()
    }

    fn div_int_exact(&self, a: &Vec<i128>, k: &BigInt) -> Result<Vec<i128>> {
        // k is a power of p here; division by p^r on residues mod p^K is
        // well defined mod p^(K-r) when the residue is divisible.
        let k = bigint_to_i128_mod(k, i128::MAX);
        let mut out = Vec::with_capacity(a.len());
        for x in a {
            if x % k != 0 {
                return Err(Error::GhostDivision);
            }
            out.push(x / k);
        }
        Ok(out)
    }
}

fn bigint_to_i128_mod(k: &BigInt, m: i128) -> i128 {
    let r = k.abs() % BigInt::from(m);
    let v: i128 = r.try_into().expect("residue fits i128");
    if k.is_negative() {
        -v
    } else {
        v
    }
}
