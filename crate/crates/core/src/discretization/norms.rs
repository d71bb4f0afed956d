use super::Field;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormKind {
    /// `(∫|u|^q)^{1/q}`, `q ≥ 1`, midpoint rule per cell.
    Lq(f64),
    /// Largest nodal absolute value.
    Linf,
    /// `(∫|Du|^p)^{1/p}` with the cellwise gradient.
    W1pSeminorm(f64),
}

/// `(Σ_c V |x_c|^q)^{1/q}` with the largest magnitude factored out so large
/// exponents neither overflow nor underflow.
fn scaled_power_mean(cell_values: impl Iterator<Item = f64> + Clone, volume: f64, q: f64) -> f64 {
    let peak = cell_values.clone().fold(0.0_f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return 0.0;
    }
    let s: f64 = cell_values.map(|v| (v.abs() / peak).powf(q)).sum();
    peak * (volume * s).powf(1.0 / q)
}

pub fn norm(u: &Field, kind: NormKind) -> f64 {
    let mesh = *u.mesh();
    let cells = 0..mesh.cell_count();
    match kind {
        NormKind::Linf => u.values().iter().fold(0.0, |m, v| m.max(v.abs())),
        NormKind::Lq(q) => {
            assert!(q >= 1.0, "Lq norm needs q >= 1, got {q}");
            scaled_power_mean(cells.map(|c| u.cell_average(c)), mesh.cell_volume(), q)
        }
        NormKind::W1pSeminorm(p) => {
            assert!(p >= 1.0, "W1p seminorm needs p >= 1, got {p}");
            let dim = mesh.dim();
            scaled_power_mean(
                cells.map(|c| {
                    let g = u.cell_gradient(c);
                    g[..dim].iter().map(|v| v * v).sum::<f64>().sqrt()
                }),
                mesh.cell_volume(),
                p,
            )
        }
    }
}

/// Midpoint-rule integral `∫ g(u(x), x-cell index)` over Ω.
pub fn integrate_cells(u: &Field, g: impl Fn(usize, f64) -> f64) -> f64 {
    let mesh = u.mesh();
    let v = mesh.cell_volume();
    (0..mesh.cell_count()).map(|c| v * g(c, u.cell_average(c))).sum()
}
