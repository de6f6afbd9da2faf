//! Prints the divergence statistics of the counterexample families so
//! regression constants can be chosen from real data.

use mot::config::Tolerances;
use mot::counterexamples::{
    cr_diagnostic, gen_nonintegrable, linear_growth_profile, local_convexity_diagnostic,
};

fn main() {
    let tols = Tolerances::default();

    let (verdict, probes) = linear_growth_profile(&[4, 8, 16], &tols).unwrap();
    println!("linear growth: converged={} profile={:?}", verdict.converged, verdict.profile);
    println!("linear growth probes g_N(-1): {probes:?}");

    for n in [8usize, 16, 32, 64] {
        let d = local_convexity_diagnostic(n, &tols).unwrap();
        let min_gap = d.slope_gaps.iter().cloned().fold(f64::INFINITY, f64::min);
        println!(
            "local-convexity N={n}: stat={:.6} stat+ln N={:.6} min slope gap={:.6}",
            d.statistic,
            d.statistic + (n as f64).ln(),
            min_gap
        );
    }

    for n in [16usize, 32, 64] {
        let d = cr_diagnostic(1.5, 1.2, n, &tols).unwrap();
        println!(
            "cr N={n}: loglog slope={:.4} cumulative={:.6}",
            d.loglog_slope, d.cumulative
        );
    }

    for k in [16usize, 64, 256] {
        let inst = gen_nonintegrable(k).unwrap();
        println!(
            "nonintegrable K={k}: nu_g={:.6} nu_g+0.5lnK={:.6} nu_g+lnK={:.6}",
            inst.nu_g,
            inst.nu_g + 0.5 * (k as f64).ln(),
            inst.nu_g + (k as f64).ln()
        );
    }
}
