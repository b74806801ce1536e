//! The seeded randomized property suite behind `loop-props`: identity laws,
//! division round trips, shrink homomorphisms, Frobenius/polynomial-action
//! commutation and the exact size-3 associator defect. On failure the
//! offending matrices are dumped as JSON and the exit code is 1.

use anyhow::Result;
use serde_json::json;

use crate::config::Config;
use crate::Output;
use muforge_core::gmatrix::{self, GMatrix};
use muforge_core::sampling::Sampler;
use muforge_core::series::s_fun;
use muforge_core::Fq;

struct Failure {
    property: &'static str,
    n: usize,
    dump: serde_json::Value,
}

pub fn loop_props(cfg: &Config, seed: u64, iterations: usize, out: &mut Output) -> Result<i32> {
    let fq = cfg.fq();
    let eis = cfg.eisenstein(&fq)?;
    let mut sampler = Sampler::new(seed);
    let mut checked = 0usize;
    for _ in 0..iterations {
        for n in 2..=4usize {
            let a = sampler.gmatrix(&fq, n, (-2, 3), 3);
            let b = sampler.gmatrix(&fq, n, (-2, 3), 3);
            let c = sampler.gmatrix(&fq, n, (-2, 3), 3);
            if let Some(fail) = check_triple(&fq, &eis, n, &a, &b, &c) {
                out.line(&json!({
                    "property": fail.property,
                    "n": fail.n,
                    "counterexample": fail.dump,
                }))?;
                return Ok(1);
            }
            checked += 1;
        }
    }
    out.line(&json!({ "summary": { "triples": checked, "failures": 0, "seed": seed } }))?;
    Ok(0)
}

fn check_triple(
    fq: &Fq,
    eis: &gmatrix::EisensteinDigits,
    n: usize,
    a: &GMatrix,
    b: &GMatrix,
    c: &GMatrix,
) -> Option<Failure> {
    let dump = |msg: &str| {
        json!({
            "a": a.to_json(fq),
            "b": b.to_json(fq),
            "c": c.to_json(fq),
            "detail": msg,
        })
    };
    let id = GMatrix::identity(n);
    if gmatrix::star(fq, &id, a) != *a || gmatrix::star(fq, a, &id) != *a {
        return Some(Failure { property: "identity", n, dump: dump("") });
    }
    let ab = gmatrix::star(fq, a, b);
    if gmatrix::ldiv(fq, a, &ab) != *b {
        return Some(Failure { property: "left-division", n, dump: dump("ldiv(a, a*b) != b") });
    }
    if gmatrix::rdiv(fq, &ab, b) != *a {
        return Some(Failure { property: "right-division", n, dump: dump("rdiv(a*b, b) != a") });
    }
    // star(a, ldiv(a, c)) = c and star(rdiv(c, b), b) = c
    if gmatrix::star(fq, a, &gmatrix::ldiv(fq, a, c)) != *c {
        return Some(Failure { property: "left-solve", n, dump: dump("") });
    }
    if gmatrix::star(fq, &gmatrix::rdiv(fq, c, b), b) != *c {
        return Some(Failure { property: "right-solve", n, dump: dump("") });
    }
    // shrink homomorphisms
    let ua = gmatrix::upper(a).unwrap();
    let ub = gmatrix::upper(b).unwrap();
    if gmatrix::upper(&ab).unwrap() != gmatrix::star(fq, &ua, &ub) {
        return Some(Failure { property: "upper-homomorphism", n, dump: dump("") });
    }
    let la = gmatrix::lower(a).unwrap();
    let lb = gmatrix::lower(b).unwrap();
    if gmatrix::lower(&ab).unwrap() != gmatrix::star(fq, &la, &lb) {
        return Some(Failure { property: "lower-homomorphism", n, dump: dump("") });
    }
    // Frobenius and polynomial action commute with shrinking
    if gmatrix::upper(&gmatrix::phi_mat(fq, a)).unwrap() != gmatrix::phi_mat(fq, &ua) {
        return Some(Failure { property: "phi-upper", n, dump: dump("") });
    }
    let en = eis.truncated(n);
    let en1 = eis.truncated(n - 1);
    if gmatrix::upper(&gmatrix::ediamond(fq, &en, a)).unwrap() != gmatrix::ediamond(fq, &en1, &ua) {
        return Some(Failure { property: "diamond-upper", n, dump: dump("") });
    }
    if gmatrix::lower(&gmatrix::ediamond(fq, &en, a)).unwrap() != gmatrix::ediamond(fq, &en1, &la) {
        return Some(Failure { property: "diamond-lower", n, dump: dump("") });
    }
    // exact associator defect at n = 3
    if n == 3 {
        let left = gmatrix::star(fq, &ab, c);
        let right = gmatrix::star(fq, a, &gmatrix::star(fq, b, c));
        let diff = left.entry(0, 2).sub(fq, right.entry(0, 2));
        let n2 = c.diag_exponents()[1];
        let n3 = c.diag_exponents()[2];
        let factor = muforge_core::laurent::LaurentPoly::monomial(fq, n3, muforge_core::ring::Ring::one(fq))
            .sub(fq, &muforge_core::laurent::LaurentPoly::monomial(fq, n2, muforge_core::ring::Ring::one(fq)));
        let s = s_fun(
            fq,
            1,
            &[
                b.entry(0, 1).mul_monomial(a.diag_exponents()[0]),
                a.entry(0, 1).mul_monomial(b.diag_exponents()[1]),
            ],
        );
        if diff != factor.mul(fq, &s) {
            return Some(Failure { property: "associator-closed-form", n, dump: dump("") });
        }
    }
    None
}
