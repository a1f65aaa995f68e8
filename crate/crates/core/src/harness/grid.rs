/// Step sizes `10^{-3}, 10^{-2.8}, …, 10^{-1}` followed by `0.1, 0.2, …, 2.0`,
/// ascending, with the shared `0.1` listed once (30 values).
pub fn standard_alpha_grid() -> Vec<f64> {
    let mut grid: Vec<f64> = (1..=20).map(|j| j as f64 / 10.0).collect();
    for i in 0..=10 {
        let a = 10f64.powf((-30 + 2 * i) as f64 / 10.0);
        push_unique(&mut grid, a);
    }
    grid.sort_by(f64::total_cmp);
    grid
}

/// Trace decays `0, 0.1, …, 0.9` followed by `0.9, 0.91, …, 1.0`, ascending,
/// with the shared `0.9` listed once (20 values).
pub fn standard_lambda_grid() -> Vec<f64> {
    let mut grid: Vec<f64> = (0..=9).map(|j| j as f64 / 10.0).collect();
    for j in 0..=10 {
        push_unique(&mut grid, (90 + j) as f64 / 100.0);
    }
    grid.sort_by(f64::total_cmp);
    grid
}

fn push_unique(grid: &mut Vec<f64>, x: f64) {
    if !grid.iter().any(|g| (g - x).abs() <= 1e-12) {
        grid.push(x);
    }
}
