mod common;

use common::*;

#[test]
fn successive_and_marginal_conditional_agree() {
    let run = gir::run(20_000, 10, 31);
    let checks = gir::checks(&run, 0.001);
    for c in &checks {
        eprintln!("{} {} ({})", if c.pass { "ok  " } else { "FAIL" }, c.name, c.detail);
    }
    assert_all(&checks);
}
