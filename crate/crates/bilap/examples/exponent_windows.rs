//! Admissible exponent windows for power-law coefficients and explicit
//! growth data.
//!
//! For `V = r^{-a}`, `K = r^{1-a}` the calculus is closed-form: the window
//! shrinks as `a` grows and closes into a split pair exactly at `a = 4`,
//! where a single Lebesgue exponent no longer works and a sum space with
//! `q1 < 4 < q2` takes over.

use bilap::exponents::{
    certify_pair, power_law_report, ExponentWindow, GrowthParams,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = 5;

    println!("power-law windows, N = {n}  (V = r^-a, K = r^(1-a))");
    for a in [0.0, 1.0, 2.0, 3.0, 3.9, 4.0] {
        let window = power_law_report(n, a)?;
        let text = match window {
            ExponentWindow::Interval { lo, hi } => format!("q in ({lo:.6}, {hi:.6})"),
            ExponentWindow::HalfLine { lo } => format!("q > {lo:.6}"),
            ExponentWindow::SplitPair { q1_lo, q1_hi, q2_min } => {
                format!("split: q1 in ({q1_lo}, {q1_hi}), q2 > {q2_min}")
            }
            ExponentWindow::Empty { reason } => format!("empty ({reason:?})"),
        };
        println!("  a = {a:<4} {text}");
    }

    // out-of-hypothesis request fails loudly rather than extrapolating
    println!("\na = 5 is out of hypothesis: {}", power_law_report(n, 5.0).unwrap_err());

    // the same machinery on explicit growth data: a bounded potential with a
    // floor at infinity (gamma = 0) and a K that vanishes at the origin
    let origin = GrowthParams::new(1.0, 0.0)?;
    let infinity = GrowthParams::with_floor(1.0, 0.0, 0.0)?;
    println!("\ncertificates for alpha = 1, beta = 0, floor gamma_inf = 0:");
    for (q1, q2) in [(1.5, 2.5), (3.0, 3.0), (9.0, 2.5), (14.0, 2.5)] {
        let cert = certify_pair(n, &origin, &infinity, q1, q2)?;
        print!("  (q1, q2) = ({q1}, {q2}): certified = {}", cert.certified);
        if let Some(rule) = cert.origin.rule {
            print!("  [origin: {}]", rule.as_str());
        } else if let Some(msg) = &cert.origin.failing {
            print!("  [origin: {msg}]");
        }
        if let Some(rule) = cert.infinity.rule {
            println!("  [infinity: {}]", rule.as_str());
        } else if let Some(msg) = &cert.infinity.failing {
            println!("  [infinity: {msg}]");
        }
    }
    Ok(())
}
