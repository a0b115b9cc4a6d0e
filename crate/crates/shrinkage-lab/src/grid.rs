//! Default evaluation grids shared by property checks, reports and the CLI.

/// 60-point w grid on [0, 50]: origin anchors {0, 0.01, 0.1, 0.5} followed
/// by 56 log-spaced points on [1, 50]. Covers the origin behavior and the
/// p-2 plateau of every library family.
pub fn standard_w_grid() -> Vec<f64> {
    let mut grid = vec![0.0, 0.01, 0.1, 0.5];
    let n = 56;
    let ln_hi = 50.0_f64.ln();
    for i in 0..n {
        grid.push((ln_hi * i as f64 / (n - 1) as f64).exp());
    }
    grid
}

/// Standard grid extended with the tail probes {1e2, 1e3, 1e4} used by the
/// domination condition scan and the limit checks.
pub fn standard_w_grid_with_tail() -> Vec<f64> {
    let mut grid = standard_w_grid();
    grid.extend_from_slice(&[1e2, 1e3, 1e4]);
    grid
}

/// Default noncentrality grid for risk curves.
pub fn default_lambda_grid() -> Vec<f64> {
    vec![0.0, 1.0, 4.0, 9.0, 25.0]
}

/// Tail probe bound; families entering the Kubokawa identity must be
/// within 0.01 of p-2 here.
pub const W_MAX_PROBE: f64 = 1e4;
