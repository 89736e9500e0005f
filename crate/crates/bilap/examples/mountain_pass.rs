//! Saddle search in the superlinear regime.
//!
//! With `V = K = 1` and `f(t) = t_+^3` the functional has mountain-pass
//! geometry: zero is a strict local minimum, yet `I(lambda u) -> -inf`
//! along any ray. The path-deformation search walks a polyline from 0 to a
//! negative-energy endpoint, relaxes its maximum, and converges to a
//! positive critical level. At the critical point the Nehari identity
//! `||u||^2 = int K u^4` pins the ratio of the energy terms.

use bilap::energy::{energy, NonlinearitySpec, PotentialSpec, SignConvention};
use bilap::grid::{build_grid, DimensionContext, RadialField, SpacingMode};
use bilap::solve::{mountain_pass, ray_scale_endpoint, SolverConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ctx = DimensionContext::new(5)?;
    let grid = build_grid(ctx, 1e-3, 30.0, 768, SpacingMode::Logarithmic)?;
    let spec = PotentialSpec::power_law(0.0);
    let pot = spec.sample(&grid)?;
    let nl = NonlinearitySpec::pure_power(4.0, SignConvention::ZeroOnNegatives)?;

    // the geometry first: energy along the seed ray rises, then collapses
    let seed = RadialField::new(grid.nodes().iter().map(|&r| (-r * r).exp()).collect());
    let (lambda, _) = ray_scale_endpoint(&grid, &pot, &nl, &seed, 1e9)?;
    println!("negative-energy endpoint at lambda = {lambda}");
    for k in 0..=6 {
        let s = lambda * f64::from(k) / 6.0;
        let scaled: Vec<f64> = seed.values().iter().map(|&x| s * x).collect();
        let e = energy(&grid, &pot, &nl, &RadialField::new(scaled)).total;
        println!("  I({s:>9.3} * seed) = {e:+.6e}");
    }

    let cfg = SolverConfig {
        grad_tol: 1e-5,
        max_iters: 400,
        ..SolverConfig::default()
    };
    let res = mountain_pass(&grid, &pot, &nl, &cfg)?;
    println!("\nclassification: {}", res.classification);
    println!("iterations:     {}", res.iterations);
    println!("dual residual:  {:.3e}", res.residual);
    println!("critical level: {:.8e} (must be positive)", res.energy.total);

    // Nehari identity: ||u||^2 = int K u^4, i.e. half_norm_sq = 2 k_term
    let ratio = res.energy.half_norm_sq / (2.0 * res.energy.k_term);
    println!("Nehari ratio:   {ratio:.8} (exactly 1 at a critical point)");
    Ok(())
}
