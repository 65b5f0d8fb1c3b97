use trisolv_core::integrate::{integrate, IntegratorConfig};
use trisolv_core::models::{registry, residual, seeded_state};

#[test]
fn catalog_constructs_and_evaluates() {
    let cat = registry();
    assert!(cat.len() >= 40, "catalog has {} entries", cat.len());
    for spec in &cat {
        let st = seeded_state(&spec, 7).unwrap_or_else(|e| panic!("{}: seed: {e}", spec.id));
        let d = spec
            .derivative(0.0, &st, &spec.defaults)
            .unwrap_or_else(|e| panic!("{}: rhs: {e}", spec.id));
        assert!(
            d.flatten().iter().all(|v| v.is_finite()),
            "{}: non-finite derivative",
            spec.id
        );
    }
}

#[test]
fn integrate_and_residual_sample() {
    let cat = registry();
    for id in ["gyro-oscillator", "matrix-master", "toda-bodies", "wedge-flow"] {
        let spec = cat.iter().find(|s| s.id == id).expect(id);
        let st = seeded_state(spec, 3).expect("seed");
        let tr = integrate(spec, &st, &spec.defaults, 0.0, 0.5, &IntegratorConfig::rk4(1e-3))
            .unwrap_or_else(|e| panic!("{id}: integrate: {e}"));
        let r = residual(spec, &tr, &spec.defaults).unwrap_or_else(|e| panic!("{id}: residual: {e}"));
        assert!(r < 1e-6, "{id}: residual {r:.3e}");
        let tr2 = integrate(spec, &st, &spec.defaults, 0.0, 0.5, &IntegratorConfig::adaptive(1e-11))
            .unwrap_or_else(|e| panic!("{id}: adaptive: {e}"));
        let a = tr.states.last().unwrap();
        let b = tr2.states.last().unwrap();
        let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-7, "{id}: rk4 vs adaptive differ by {diff:.3e}");
        println!("ok {id} residual={r:.3e} cross={diff:.3e}");
    }
}
