mod common;

use common::{random_dense, random_u, rng};
use qmms_core::norms::embs::embs_check;
use rand::Rng;

#[test]
fn identities_on_random_spaces() {
    let mut r = rng(21);
    let ps = [1.0, 1.5, 2.0, f64::INFINITY];
    let qs = [1.0, 1.5, 2.0, f64::INFINITY];
    let mut worst: f64 = 0.0;
    for case in 0..60 {
        let n = r.random_range(3..=12);
        let s = random_dense(&mut r, n, case % 3 == 0);
        let u = random_u(&mut r, n);
        let (p, q) = (ps[case % 4], qs[(case / 4) % 4]);
        let rep = match embs_check(&s, &u, 0.8, 0.5, p, q, 2.0) { Ok(r) => r, Err(e) => panic!("case {case} n {n} p {p} q {q}: {e:?}") };
        for it in &rep.items {
            if it.equality {
                worst = worst.max((it.lhs - it.rhs).abs() / it.lhs.abs().max(1e-300));
            }
        }
        assert!(rep.all_hold, "case {case} p {p} q {q}: {rep:#?}");
    }
    eprintln!("worst relative equality error {worst:e}");
}
