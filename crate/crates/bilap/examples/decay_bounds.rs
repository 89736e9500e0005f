//! Pointwise decay bounds with explicit constants, exercised on random
//! smooth fields.
//!
//! Four bounds are checked: two through `||lap u||` that hold for every
//! admissible field, and two floor-based bounds (outer for gamma <= 14/3,
//! inner for gamma >= 4) whose constants involve the node-wise potential
//! floor. Each report is the worst observed ratio of |u| against its bound;
//! anything at or below 1 (plus quadrature slack) passes.

use bilap::grid::{build_grid, DimensionContext, SpacingMode};
use bilap::verify::{
    check_decay_inner, check_decay_outer, check_pointwise, per_trial_rng, random_bump_field,
    BoundKind,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ctx = DimensionContext::new(5)?;
    let grid = build_grid(ctx, 1e-4, 50.0, 1024, SpacingMode::Logarithmic)?;
    let fields = 50;
    let slack = 1e-3;

    let mut worst = [0.0f64; 4];
    let v_unit = vec![1.0; grid.len()];
    let v_quartic: Vec<f64> = grid.nodes().iter().map(|&r| r.powi(-4)).collect();

    for trial in 0..fields {
        let mut rng = per_trial_rng(20, trial);
        let u = random_bump_field(&grid, &mut rng);
        let reports = [
            check_pointwise(&grid, &u, BoundKind::ValueByDeltaNorm, slack)?,
            check_pointwise(&grid, &u, BoundKind::GradientByDeltaNorm, slack)?,
            // V = 1 has the trivial floor gamma = 0 past any radius
            check_decay_outer(&grid, &v_unit, 0.0, 1.0, &u, slack)?,
            // V = r^-4 has the floor gamma = 4 inside any radius
            check_decay_inner(&grid, &v_quartic, 4.0, 1.0, &u, slack)?,
        ];
        for (w, rep) in worst.iter_mut().zip(&reports) {
            assert!(rep.pass, "bound {:?} violated: {}", rep.kind, rep.max_ratio);
            *w = w.max(rep.max_ratio);
        }
    }

    println!("worst ratio over {fields} random fields (1 saturates the bound):");
    let names = [
        BoundKind::ValueByDeltaNorm,
        BoundKind::GradientByDeltaNorm,
        BoundKind::OuterFloorDecay,
        BoundKind::InnerFloorDecay,
    ];
    for (kind, w) in names.iter().zip(&worst) {
        println!("  {:<24} {w:.4}", kind.name());
    }

    // the constants are fully explicit; print the two floor-based ones
    let mut rng = per_trial_rng(20, 0);
    let u = random_bump_field(&grid, &mut rng);
    let outer = check_decay_outer(&grid, &v_unit, 0.0, 1.0, &u, slack)?;
    let inner = check_decay_inner(&grid, &v_quartic, 4.0, 1.0, &u, slack)?;
    println!(
        "\nouter bound: |u| <= {:.6} ||u||_V / r^{} past r = 1",
        outer.constant_used, outer.exponent
    );
    println!(
        "inner bound: |u| <= {:.6} ||u||_V / r^{} inside r = 1",
        inner.constant_used, inner.exponent
    );
    Ok(())
}
