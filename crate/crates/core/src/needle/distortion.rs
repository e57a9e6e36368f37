/// `sin_κ`: solution of `v'' + κv = 0`, `v(0) = 0`, `v'(0) = 1`.
pub fn sin_kappa(kappa: f64, x: f64) -> f64 {
    if kappa > 0.0 {
        let s = kappa.sqrt();
        (s * x).sin() / s
    } else if kappa < 0.0 {
        let s = (-kappa).sqrt();
        (s * x).sinh() / s
    } else {
        x
    }
}

/// `π_κ = π/√κ` for κ > 0, ∞ otherwise.
pub fn pi_kappa(kappa: f64) -> f64 {
    if kappa > 0.0 {
        std::f64::consts::PI / kappa.sqrt()
    } else {
        f64::INFINITY
    }
}

/// Distortion coefficient `σ^{(t)}_{K,N}(θ)`.
pub fn sigma(k: f64, n: f64, t: f64, theta: f64) -> f64 {
    if theta == 0.0 {
        return t;
    }
    let kappa = k / n;
    if theta >= pi_kappa(kappa) {
        return f64::INFINITY;
    }
    sin_kappa(kappa, t * theta) / sin_kappa(kappa, theta)
}

/// Modified distortion coefficient `τ^{(t)}_{K,N}(θ)`. For `N = 1` and
/// `K > 0` it is `θ·∞`, read as 0 at `θ = 0`.
pub fn tau(k: f64, n: f64, t: f64, theta: f64) -> f64 {
    if (n - 1.0).abs() < 1e-12 {
        if k > 0.0 {
            return if theta == 0.0 { 0.0 } else { f64::INFINITY };
        }
        return t;
    }
    let s = sigma(k, n - 1.0, t, theta);
    if s.is_infinite() {
        return f64::INFINITY;
    }
    t.powf(1.0 / n) * s.powf(1.0 - 1.0 / n)
}
