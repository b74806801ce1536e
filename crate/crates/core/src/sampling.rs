//! Seeded random generators for the property suites: Witt vectors, Laurent
//! polynomials, loop matrices and positive T-matrices. Everything is driven
//! by an explicit ChaCha stream so runs are reproducible byte for byte.

use num_bigint::BigInt;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::fq::Fq;
use crate::gmatrix::GMatrix;
use crate::laurent::LaurentPoly;
use crate::witt::WittVector;
use crate::FqPoly;

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn int_in(&mut self, lo: i64, hi: i64) -> i64 {
        self.rng.gen_range(lo..=hi)
    }

    /// Random integer Witt vector with small components.
    pub fn int_witt(&mut self, len: usize, mag: i64) -> WittVector<BigInt> {
        WittVector::new((0..len).map(|_| BigInt::from(self.int_in(-mag, mag))).collect())
    }

    pub fn fq_elem(&mut self, fq: &Fq) -> crate::fq::FqElem {
        crate::fq::FqElem(self.rng.gen_range(0..fq.q()))
    }

    /// Random Laurent polynomial with the given degree window; may be zero.
    pub fn laurent(&mut self, fq: &Fq, min_lo: i64, min_hi: i64, max_len: usize) -> FqPoly {
        let min = self.int_in(min_lo, min_hi);
        let len = self.rng.gen_range(0..=max_len);
        let coeffs = (0..len).map(|_| self.fq_elem(fq)).collect();
        LaurentPoly::from_coeffs(fq, min, coeffs)
    }

    /// Random polynomial of degree < bound (zero when bound <= 0).
    pub fn poly_below(&mut self, fq: &Fq, bound: i64) -> FqPoly {
        if bound <= 0 {
            return LaurentPoly::zero();
        }
        let coeffs = (0..bound).map(|_| self.fq_elem(fq)).collect();
        LaurentPoly::from_coeffs(fq, 0, coeffs)
    }

    /// Random element of the matrix loop, Laurent entries allowed negative.
    pub fn gmatrix(&mut self, fq: &Fq, n: usize, lrange: (i64, i64), max_len: usize) -> GMatrix {
        let l: Vec<i64> = (0..n).map(|_| self.int_in(lrange.0, lrange.1)).collect();
        let mut g = GMatrix::diagonal(l);
        for i in 0..n {
            for j in (i + 1)..n {
                g.set_entry(i, j, self.laurent(fq, -2, 2, max_len));
            }
        }
        g
    }

    /// Random positive unitriangular matrix (diagonal exponents zero).
    pub fn positive_unitriangular(&mut self, fq: &Fq, n: usize, max_len: usize) -> GMatrix {
        let mut g = GMatrix::diagonal(vec![0; n]);
        for i in 0..n {
            for j in (i + 1)..n {
                g.set_entry(i, j, self.laurent(fq, 0, 2, max_len));
            }
        }
        g
    }

    /// Random distinguished matrix of size n <= 3: decreasing type within
    /// [0, lmax], degree bounds deg a_ij < l_j, and the compatibility
    /// congruence a12 = u^(l1-l2) a23 mod u^(l3) at size 3.
    pub fn distinguished(&mut self, fq: &Fq, n: usize, lmax: i64) -> GMatrix {
        assert!(n >= 1 && n <= 3);
        let mut l = Vec::with_capacity(n);
        let mut cap = lmax;
        for _ in 0..n {
            let v = self.int_in(0, cap);
            l.push(v);
            cap = v;
        }
        let mut g = GMatrix::diagonal(l.clone());
        match n {
            1 => {}
            2 => {
                let a12 = self.poly_below(fq, l[1]);
                g.set_entry(0, 1, a12);
            }
            _ => {
                let a23 = self.poly_below(fq, l[2]);
                let a13 = self.poly_below(fq, l[2]);
                // a12 = (u^(l1-l2) a23 mod u^(l3)) + u^(l3) s, deg < l2
                let forced = a23.mul_monomial(l[0] - l[1]).low_part(fq, l[2]);
                let s = self.poly_below(fq, l[1] - l[2]);
                let a12 = forced.add(fq, &s.mul_monomial(l[2]));
                g.set_entry(0, 1, a12);
                g.set_entry(0, 2, a13);
                g.set_entry(1, 2, a23);
            }
        }
        g
    }

    /// Random positive T-matrix: a distinguished matrix times a positive
    /// unitriangular factor (same lattice, still a T-basis).
    pub fn positive_t_matrix(&mut self, fq: &Fq, n: usize, lmax: i64, max_len: usize) -> GMatrix {
        let d = self.distinguished(fq, n, lmax);
        let b = self.positive_unitriangular(fq, n, max_len);
        crate::gmatrix::star(fq, &b, &d)
    }
}
