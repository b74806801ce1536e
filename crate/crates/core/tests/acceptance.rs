//! Acceptance suite: seven criteria, each printed as a PASS/FAIL line with
//! its runtime. Run with `cargo test --test acceptance -- --nocapture` to see
//! the lines; any failure fails the corresponding test.

use std::time::Instant;

use num_bigint::BigInt;
use num_traits::Zero;

use muforge_core::classify::{self, Coro1Tweak, MuParams3};
use muforge_core::dictionary::{self, DictContext};
use muforge_core::gmatrix::{self, EisensteinDigits, GMatrix};
use muforge_core::kummer::{self, KummerTweak, SSMatrix};
use muforge_core::laurent::{LaurentPoly, LaurentRing};
use muforge_core::lattice::Lattice;
use muforge_core::okring::{OkContext, Valuation};
use muforge_core::ring::{BigIntRing, GhostRing, Ring, WittCoeffs};
use muforge_core::sampling::Sampler;
use muforge_core::series::s_fun;
use muforge_core::witt::{self, WittVector};
use muforge_core::Fq;

fn report(id: u32, name: &str, pass: bool, started: Instant, budget_s: u64, detail: &str) {
    let elapsed = started.elapsed();
    println!(
        "criterion {id} ({name}): {} in {:.2}s [budget {budget_s}s] {detail}",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
    );
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
    assert!(
        elapsed.as_secs() < budget_s,
        "criterion {id} exceeded the {budget_s}s budget"
    );
}

/// Witt coefficients in Z[u]-style Laurent polynomials: torsion-free, its
/// own ghost lift.
struct IntLaurent(LaurentRing<BigIntRing>);

impl Ring for IntLaurent {
    type Elem = LaurentPoly<BigIntRing>;
    fn zero(&self) -> Self::Elem {
        self.0.zero()
    }
    fn one(&self) -> Self::Elem {
        self.0.one()
    }
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.0.add(a, b)
    }
    fn neg(&self, a: &Self::Elem) -> Self::Elem {
        self.0.neg(a)
    }
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.0.mul(a, b)
    }
}

impl WittCoeffs for IntLaurent {
    type Lift = LaurentRing<BigIntRing>;
    fn lift_ring(&self) -> &Self::Lift {
        &self.0
    }
    fn lift(&self, a: &Self::Elem) -> Self::Elem {
        a.clone()
    }
    fn reduce(&self, a: &Self::Elem) -> Self::Elem {
        a.clone()
    }
}

#[test]
fn criterion_1_witt_ghost_exactness() {
    let started = Instant::now();
    let z = BigIntRing;
    let mut s = Sampler::new(101);
    let mut vectors = 0usize;
    let mut ok = true;

    // integer coefficients: exact ghost homomorphism identities
    for _ in 0..2500 {
        let len = s.int_in(1, 5) as usize;
        let a = s.int_witt(len, 6);
        let b = s.int_witt(len, 6);
        vectors += 2;
        let sum = witt::witt_add(3, &z, &a, &b);
        let prod = witt::witt_mul(3, &z, &a, &b);
        for r in 0..len {
            let ga = witt::ghost(3, &z, a.coeffs(), r);
            let gb = witt::ghost(3, &z, b.coeffs(), r);
            ok &= witt::ghost(3, &z, sum.coeffs(), r) == &ga + &gb;
            ok &= witt::ghost(3, &z, prod.coeffs(), r) == &ga * &gb;
        }
    }

    // polynomial coefficients over the torsion-free Laurent ring: the same
    // exact identities, with polynomial entries
    let il = IntLaurent(LaurentRing::new(BigIntRing));
    let rand_poly = |s: &mut Sampler| {
        let len = s.int_in(0, 2) as usize;
        let min = s.int_in(0, 1);
        LaurentPoly::from_coeffs(
            &BigIntRing,
            min,
            (0..=len).map(|_| BigInt::from(s.int_in(0, 2))).collect(),
        )
    };
    for _ in 0..1250 {
        let len = s.int_in(1, 4) as usize;
        let a = WittVector::new((0..len).map(|_| rand_poly(&mut s)).collect());
        let b = WittVector::new((0..len).map(|_| rand_poly(&mut s)).collect());
        vectors += 2;
        let sum = witt::witt_add(3, &il, &a, &b);
        let prod = witt::witt_mul(3, &il, &a, &b);
        for r in 0..len {
            let lr = il.lift_ring();
            let ga = witt::ghost(3, lr, a.coeffs(), r);
            let gb = witt::ghost(3, lr, b.coeffs(), r);
            ok &= witt::ghost(3, lr, sum.coeffs(), r) == lr.add(&ga, &gb);
            ok &= witt::ghost(3, lr, prod.coeffs(), r) == lr.mul(&ga, &gb);
        }
    }

    // mod-3 polynomial coefficients: the plugin agrees with the universal
    // sum polynomials S_0, S_1 evaluated in the lift
    let fq = std::sync::Arc::new(Fq::prime_field(3));
    let coeffs = muforge_core::series::FqPolyCoeffs::new(fq.clone());
    let fqa = muforge_core::series::FqArc(fq.clone());
    let rand_fq_poly = |s: &mut Sampler| {
        let len = s.int_in(0, 2) as usize;
        LaurentPoly::from_coeffs(
            &fqa,
            s.int_in(0, 1),
            (0..=len).map(|_| muforge_core::FqElem(s.int_in(0, 2) as u64)).collect(),
        )
    };
    for _ in 0..1250 {
        let len = s.int_in(2, 4) as usize;
        let a = WittVector::new((0..len).map(|_| rand_fq_poly(&mut s)).collect());
        let b = WittVector::new((0..len).map(|_| rand_fq_poly(&mut s)).collect());
        vectors += 2;
        let sum = witt::witt_add(3, &coeffs, &a, &b);
        let lr = coeffs.lift_ring();
        let la0 = coeffs.lift(&a.coeffs()[0]);
        let lb0 = coeffs.lift(&b.coeffs()[0]);
        let s0 = lr.add(&la0, &lb0);
        ok &= coeffs.reduce(&s0) == sum.coeffs()[0];
        let cube = |x: &LaurentPoly<muforge_core::IntPolyQuot>| lr.mul(&lr.mul(x, x), x);
        let sigma1 = lr
            .div_int_exact(&lr.sub(&lr.add(&cube(&la0), &cube(&lb0)), &cube(&s0)), &BigInt::from(3))
            .unwrap();
        let s1 = lr.add(
            &lr.add(&coeffs.lift(&a.coeffs()[1]), &coeffs.lift(&b.coeffs()[1])),
            &sigma1,
        );
        ok &= coeffs.reduce(&s1) == sum.coeffs()[1];
    }

    // the Witt expansion of the prime itself
    for p in [3u64, 5] {
        let w = witt::witt_from_int(p, &z, p as i64, 5);
        ok &= w.coeffs()[0] == BigInt::from(p);
        ok &= w.coeffs()[1] == BigInt::from(1) - BigInt::from(p).pow(p as u32 - 1);
        for i in 2..5 {
            let pe = BigInt::from(p).pow(p as u32 - 1);
            let c = &w.coeffs()[i];
            ok &= (c % &pe).is_zero() && !((c / &pe) % BigInt::from(p)).is_zero();
        }
    }

    report(1, "witt ghost exactness", ok, started, 30, &format!("{vectors} vectors"));
}

#[test]
fn criterion_2_loop_suite() {
    let started = Instant::now();
    let fq = Fq::prime_field(3);
    let eis = EisensteinDigits::from_integer_coeffs(&fq, 2, &[-3, 0], 5).unwrap();
    let mut s = Sampler::new(202);
    let mut triples = 0usize;
    let mut failures = 0usize;
    'outer: for round in 0..667usize {
        for n in 2..=4usize {
            if triples >= 2000 {
                break 'outer;
            }
            let a = s.gmatrix(&fq, n, (-2, 3), 3);
            let b = s.gmatrix(&fq, n, (-2, 3), 3);
            let c = s.gmatrix(&fq, n, (-2, 3), 3);
            triples += 1;
            let id = GMatrix::identity(n);
            let ab = gmatrix::star(&fq, &a, &b);
            let mut good = gmatrix::star(&fq, &id, &a) == a && gmatrix::star(&fq, &a, &id) == a;
            good &= gmatrix::ldiv(&fq, &a, &ab) == b;
            good &= gmatrix::rdiv(&fq, &ab, &b) == a;
            good &= gmatrix::star(&fq, &a, &gmatrix::ldiv(&fq, &a, &c)) == c;
            good &= gmatrix::star(&fq, &gmatrix::rdiv(&fq, &c, &b), &b) == c;
            let (ua, ub) = (gmatrix::upper(&a).unwrap(), gmatrix::upper(&b).unwrap());
            let (la, lb) = (gmatrix::lower(&a).unwrap(), gmatrix::lower(&b).unwrap());
            good &= gmatrix::upper(&ab).unwrap() == gmatrix::star(&fq, &ua, &ub);
            good &= gmatrix::lower(&ab).unwrap() == gmatrix::star(&fq, &la, &lb);
            good &= gmatrix::upper(&gmatrix::phi_mat(&fq, &a)).unwrap() == gmatrix::phi_mat(&fq, &ua);
            let en = eis.truncated(n);
            let en1 = eis.truncated(n - 1);
            let da = gmatrix::ediamond(&fq, &en, &a);
            good &= gmatrix::upper(&da).unwrap() == gmatrix::ediamond(&fq, &en1, &ua);
            good &= gmatrix::lower(&da).unwrap() == gmatrix::ediamond(&fq, &en1, &la);
            if n == 3 {
                let left = gmatrix::star(&fq, &ab, &c);
                let right = gmatrix::star(&fq, &a, &gmatrix::star(&fq, &b, &c));
                let diff = left.entry(0, 2).sub(&fq, right.entry(0, 2));
                let n2 = c.diag_exponents()[1];
                let n3 = c.diag_exponents()[2];
                let factor = LaurentPoly::monomial(&fq, n3, fq.one())
                    .sub(&fq, &LaurentPoly::monomial(&fq, n2, fq.one()));
                let carry = s_fun(
                    &fq,
                    1,
                    &[
                        b.entry(0, 1).mul_monomial(a.diag_exponents()[0]),
                        a.entry(0, 1).mul_monomial(b.diag_exponents()[1]),
                    ],
                );
                good &= diff == factor.mul(&fq, &carry);
            }
            if !good {
                failures += 1;
            }
        }
        let _ = round;
    }
    report(
        2,
        "loop suite",
        failures == 0 && triples >= 2000,
        started,
        60,
        &format!("{triples} triples, {failures} failures"),
    );
}

#[test]
fn criterion_3_lattice_matrix_correspondence() {
    let started = Instant::now();
    let f3 = Fq::prime_field(3);
    let f9 = Fq::new(3, 2);
    let mut s = Sampler::new(303);
    let mut checked = 0usize;
    let mut ok = true;
    let deg_bound = 60i64;
    for round in 0..250usize {
        for fq in [&f3, &f9] {
            let n = s.int_in(1, 3) as usize;
            let d = s.distinguished(fq, n, 2);
            let b = s.positive_unitriangular(fq, n, 2);
            let a = gmatrix::star(fq, &b, &d);
            checked += 1;
            let lat = match Lattice::from_matrix(fq, &a, deg_bound) {
                Ok(l) => l,
                Err(_) => {
                    ok = false;
                    continue;
                }
            };
            // distinguished round trip and the type ordering
            let dist = lat.distinguished_matrix(fq);
            ok &= dist == d;
            ok &= dist.diag_exponents().windows(2).all(|w| w[0] >= w[1]);
            // vol = u^(sum l_i) = det
            ok &= lat.volume_exponent() == a.diag_exponents().iter().sum::<i64>();
            // positivity transfer
            ok &= dist.is_positive();
            // kernel/image match the shrink operators
            for i in 2..=n {
                let mut low = a.clone();
                let mut up = a.clone();
                for _ in 0..(i - 1) {
                    low = gmatrix::lower(&low).unwrap();
                    up = gmatrix::upper(&up).unwrap();
                }
                let ki = lat.kernel_i(fq, i).unwrap();
                let ii = lat.image_i(fq, i).unwrap();
                ok &= ki.lattice_eq(fq, &Lattice::from_matrix(fq, &low, deg_bound).unwrap());
                ok &= ii.lattice_eq(fq, &Lattice::from_matrix(fq, &up, deg_bound).unwrap());
            }
            // the cached echelon basis is exactly the rows of [A] p*
            ok &= lat.echelon_basis() == &a.padic_rows(fq)[..];
            // and a random not-necessarily-T matrix satisfies the oracle
            // equivalence: T-matrix iff the echelon returns its rows
            let r = {
                let mut g = s.gmatrix(fq, n, (0, 2), 2);
                // keep entries polynomial so the lattice is positive-ish
                for i in 0..n {
                    for j in (i + 1)..n {
                        let e = g.entry(i, j).clone();
                        g.set_entry(i, j, e.low_part(fq, 4));
                    }
                }
                g
            };
            if let Ok(lr) = Lattice::from_matrix(fq, &r, deg_bound) {
                let echelon_matches = lr.echelon_basis() == &r.padic_rows(fq)[..];
                ok &= echelon_matches == classify::is_t_matrix(fq, &r);
            }
            // inclusion matches the loop order, against a second T-matrix
            let d2 = s.distinguished(fq, n, 2);
            let a2 = gmatrix::star(fq, &s.positive_unitriangular(fq, n, 2), &d2);
            if let Ok(lat2) = Lattice::from_matrix(fq, &a2, deg_bound) {
                let incl = lat2.includes(fq, &lat);
                let succ = gmatrix::succ(fq, &a, &a2);
                ok &= incl == succ;
            }
        }
        let _ = round;
        if !ok {
            break;
        }
    }
    report(
        3,
        "lattice/matrix correspondence",
        ok && checked >= 500,
        started,
        120,
        &format!("{checked} matrices"),
    );
}

fn grid_cases() -> Vec<(i64, Vec<i64>)> {
    vec![(2, vec![-3, 0]), (3, vec![-3, 0, 0]), (4, vec![-3, 0, 3, 0])]
}

#[test]
fn criterion_4_three_way_agreement_n3() {
    let started = Instant::now();
    let fq = Fq::prime_field(3);
    let mut ok = true;
    let mut total = 0usize;
    let mut passing = 0usize;
    for (e, coeffs) in grid_cases() {
        let eis = EisensteinDigits::from_integer_coeffs(&fq, e, &coeffs, 4).unwrap();
        let deg_bound = classify::default_deg_bound(3, e);
        let lmax = e / 2;
        for l in classify::types_below(3, lmax) {
            // parameter-count sanity: the grid has q^(sum of i*l_i) slots
            let slots: u32 = (l[1] + 2 * l[2]) as u32;
            let mut grid_size = 0u64;
            for cand in classify::candidates_of_type(&fq, &l) {
                grid_size += 1;
                total += 1;
                let via_pred = classify::is_mu_matrix(&fq, &cand, &eis);
                let params = MuParams3::from_matrix(&cand);
                let via_coro = classify::check_coro1(&fq, &params, &eis, e);
                let via_lat = match Lattice::from_matrix(&fq, &cand, deg_bound) {
                    Ok(lat) => {
                        lat.is_mu_lattice(&fq, &eis).unwrap() && classify::is_distinguished(&fq, &cand)
                    }
                    Err(_) => false,
                };
                if via_pred != via_coro || via_pred != via_lat {
                    ok = false;
                }
                if e % 3 != 0 {
                    let tame = classify::check_tame(&fq, &params, &eis, e).unwrap();
                    if tame != via_coro {
                        ok = false;
                    }
                }
                if via_pred {
                    passing += 1;
                    // closure under the shrink operators
                    let eis2 = eis.truncated(2);
                    ok &= classify::is_mu_matrix(&fq, &gmatrix::upper(&cand).unwrap(), &eis2);
                    ok &= classify::is_mu_matrix(&fq, &gmatrix::lower(&cand).unwrap(), &eis2);
                    // entry valuation bound p val(a_(i,i+1)) >= l_(i+1)
                    for (i, j) in [(0usize, 1usize), (1, 2)] {
                        if let Some(v) = cand.entry(i, j).val() {
                            ok &= 3 * v >= cand.diag_exponents()[j];
                        }
                    }
                }
            }
            ok &= grid_size == 3u64.pow(slots);
        }
    }
    report(
        4,
        "three-way classification agreement",
        ok && passing > 0,
        started,
        900,
        &format!("{total} candidates, {passing} models"),
    );
}

#[test]
fn criterion_5_finiteness_oracle_agreement() {
    let started = Instant::now();
    let wlen = kummer::DEFAULT_WITT_LEN;
    let mut ok = true;
    let mut total = 0usize;
    let mut accepted = 0usize;

    // n = 2 grids
    for (e, coeffs) in grid_cases() {
        let ctx = OkContext::with_default_precision(3, e, &coeffs, 2 * (e / 2)).unwrap();
        let lmax = e / 2;
        for l1 in 0..=lmax {
            for l2 in 0..=lmax {
                for digits in dictionary::digit_strings(3, l2 + 1) {
                    let a12 = ctx.from_digits(&digits, ctx.n());
                    total += 1;
                    let cong = kummer::check_kummer_n2(&ctx, l1, l2, &a12).unwrap();
                    let frame = SSMatrix::teichmuller2(&ctx, [l1, l2], &a12);
                    let member = kummer::in_mn(&ctx, &frame, wlen).unwrap();
                    let oracle = member && kummer::verify_integrality(&ctx, &frame).unwrap();
                    if cong != oracle {
                        ok = false;
                    }
                    // ordering is implied by the congruences alone: no
                    // parameter with l1 < l2 satisfies both of them
                    if l1 < l2 && (3 - 1) * l1 <= e {
                        let frob_ok = ctx.is_zero_mod(&ctx.ok_pow(&a12, 3), l2).unwrap();
                        let omega = ctx.div_pi(&ctx.from_int(3), 2 * l1).unwrap();
                        let lhs = ctx.ok_sub(
                            &ctx.ok_sub(&ctx.ok_mul(&ctx.from_int(3), &a12), &ctx.pi_pow(l1)),
                            &ctx.ok_mul(&omega, &ctx.ok_pow(&a12, 3)),
                        );
                        let third_ok = ctx.is_zero_mod(&lhs, 3 * l2).unwrap();
                        if frob_ok && third_ok {
                            ok = false;
                        }
                    }
                    if cong {
                        accepted += 1;
                        // the ordering is implied, never violated
                        ok &= l1 >= l2;
                        // isogeny pair with the Frobenius partner
                        ok &= kummer::check_isogeny_pair(&ctx, &frame, &frame.frobenius(&ctx), wlen)
                            .unwrap();
                        if let Valuation::Exact(v) = ctx.valuation(&a12) {
                            ok &= 3 * v >= l2;
                        }
                    }
                }
            }
        }
    }

    // n = 3 grid at e = 6 with the gate l1 >= 3 l3
    let e = 6i64;
    let coeffs = vec![-3i64, 0, 0, 0, 0, 0];
    let ctx = OkContext::with_default_precision(3, e, &coeffs, 9).unwrap();
    for l in classify::types_below(3, e / 2) {
        let (l1, l2, l3) = (l[0], l[1], l[2]);
        if l1 < 3 * l3 {
            continue;
        }
        for d12 in dictionary::digit_strings(3, l2) {
            for d13 in dictionary::digit_strings(3, l3) {
                for d23 in dictionary::digit_strings(3, l3) {
                    let a12 = ctx.from_digits(&d12, ctx.n());
                    let a13 = ctx.from_digits(&d13, ctx.n());
                    let a23 = ctx.from_digits(&d23, ctx.n());
                    total += 1;
                    let cong = kummer::check_kummer_n3(&ctx, [l1, l2, l3], &a12, &a13, &a23).unwrap();
                    let member = kummer::in_m3_teich(&ctx, [l1, l2, l3], &a12, &a13, &a23).unwrap();
                    let frame = SSMatrix::teichmuller3(&ctx, [l1, l2, l3], &a12, &a13, &a23);
                    let oracle = member && kummer::verify_integrality(&ctx, &frame).unwrap();
                    if cong != oracle {
                        ok = false;
                    }
                    if cong {
                        accepted += 1;
                        ok &= l1 >= l2 && l2 >= l3 && 2 * l1 <= e;
                        ok &= kummer::check_isogeny_pair(&ctx, &frame, &frame.frobenius(&ctx), wlen)
                            .unwrap();
                    }
                }
            }
        }
    }
    report(
        5,
        "finiteness oracle agreement",
        ok && accepted > 0,
        started,
        600,
        &format!("{total} candidates, {accepted} accepted"),
    );
}

#[test]
fn criterion_6_dictionary() {
    let started = Instant::now();
    let mut ok = true;
    let mut detail = String::new();
    for (e, coeffs) in grid_cases() {
        let ctx = DictContext::new(3, e, &coeffs).unwrap();
        ok &= ctx.eisenstein_identity_holds().unwrap();
        ok &= dictionary::order_preserved_n2(&ctx).unwrap();
        let report2 = dictionary::compare_n2(&ctx).unwrap();
        ok &= report2.matched;
        detail.push_str(&format!("n2/e{e}: {} models; ", report2.side_a_count));
        if !report2.matched {
            detail.push_str(&format!("mismatches {:?}; ", report2.mismatches));
        }
    }
    let ctx = DictContext::new(3, 6, &[-3, 0, 0, 0, 0, 0]).unwrap();
    let report3 = dictionary::compare_n3(&ctx).unwrap();
    ok &= report3.matched && report3.compat_redundant == Some(true);
    detail.push_str(&format!(
        "n3/e6: {} models under gate, {} untested types",
        report3.side_a_count,
        report3.untested_types.len()
    ));
    if !report3.matched {
        detail.push_str(&format!(" mismatches {:?}", report3.mismatches));
    }
    report(6, "dictionary", ok, started, 600, &detail);
}

#[test]
fn criterion_7_negative_controls() {
    let started = Instant::now();
    let fq = Fq::prime_field(3);
    let mut ok = true;

    // classification suite: a one-digit modulus change flips some verdict
    let eis = EisensteinDigits::from_integer_coeffs(&fq, 2, &[-3, 0], 4).unwrap();
    for tweak in [Coro1Tweak::EisensteinModulus(1)] {
        let mut diffs = 0usize;
        for l in classify::types_below(3, 1) {
            for cand in classify::candidates_of_type(&fq, &l) {
                let params = MuParams3::from_matrix(&cand);
                let real = classify::check_coro1(&fq, &params, &eis, 2);
                let mutated = classify::check_coro1_tweaked(&fq, &params, &eis, 2, tweak);
                if real != mutated {
                    diffs += 1;
                }
            }
        }
        if diffs == 0 {
            ok = false;
        }
    }

    // finiteness suite
    let ctx = OkContext::with_default_precision(3, 2, &[-3, 0], 4).unwrap();
    for tweak in [KummerTweak::FirstModulus(1)] {
        let mut diffs = 0usize;
        for l1 in 0..=1i64 {
            for l2 in 0..=l1 {
                for digits in dictionary::digit_strings(3, l2 + 1) {
                    let a12 = ctx.from_digits(&digits, ctx.n());
                    let real = kummer::check_kummer_n2(&ctx, l1, l2, &a12).unwrap();
                    let mutated = kummer::check_kummer_n2_tweaked(&ctx, l1, l2, &a12, tweak)
                        .unwrap_or(false);
                    if real != mutated {
                        diffs += 1;
                    }
                }
            }
        }
        if diffs == 0 {
            ok = false;
        }
    }

    // dictionary suite: comparing the real first side against a mutated
    // second side must produce a mismatch
    let dctx = DictContext::new(3, 2, &[-3, 0]).unwrap();
    let mut diffs = 0usize;
    for l1 in 0..=1i64 {
        for l2 in 0..=l1 {
            for a12 in classify::polys_below(&dctx.fq, l2) {
                let mut cand = GMatrix::diagonal(vec![l1, l2]);
                cand.set_entry(0, 1, a12.clone());
                let bk = classify::is_mu_matrix(&dctx.fq, &cand, &dctx.eis);
                let img = dctx.star_map(&a12, 3 * l2).unwrap();
                let ss_mutated = kummer::check_kummer_n2_tweaked(
                    &dctx.ok,
                    l1,
                    l2,
                    &img,
                    KummerTweak::FirstModulus(1),
                )
                .unwrap_or(false);
                if bk != ss_mutated {
                    diffs += 1;
                }
            }
        }
    }
    if diffs == 0 {
        ok = false;
    }

    report(7, "negative controls", ok, started, 120, "modulus perturbations detected");
}
