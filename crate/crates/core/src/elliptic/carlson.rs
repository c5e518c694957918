use num_complex::Complex64;

/// Carlson's symmetric integral `R_F(x, y, z)` for complex arguments.
///
/// Uses the duplication theorem with principal square roots. The result is
/// the principal value when no argument lies on the closed negative real axis;
/// otherwise it is one of the limiting values, which is all the callers here
/// need (they polish the answer with Newton steps afterwards).
pub fn carlson_rf(x: Complex64, y: Complex64, z: Complex64) -> Complex64 {
    let (x0, y0) = (x, y);
    let (mut x, mut y, mut z) = (x, y, z);
    let a0 = (x + y + z) / 3.0;
    let mut a = a0;
    let spread = (a0 - x).norm().max((a0 - y).norm()).max((a0 - z).norm());
    // (3r)^(-1/6) with r = 1e-16
    let mut q = spread * 215.443_469;
    let mut pow4 = 1.0;
    for _ in 0..200 {
        if q < a.norm() {
            break;
        }
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lam = sx * sy + sx * sz + sy * sz;
        x = (x + lam) * 0.25;
        y = (y + lam) * 0.25;
        z = (z + lam) * 0.25;
        a = (a + lam) * 0.25;
        q *= 0.25;
        pow4 *= 4.0;
    }
    let xx = (a0 - x0) / (pow4 * a);
    let yy = (a0 - y0) / (pow4 * a);
    let zz = -xx - yy;
    let e2 = xx * yy - zz * zz;
    let e3 = xx * yy * zz;
    (1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0) / a.sqrt()
}
