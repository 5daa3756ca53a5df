//! Small deterministic maximizers for the model fits.
//!
//! Both routines are derivative-free, use no randomness, and return the best
//! *evaluated* point rather than a point inferred from the final bracket or
//! simplex, so a fit can never report a parameter whose objective was worse
//! than one it already computed.

/// Tracks the best point seen across every objective evaluation.
struct BestTracker<const N: usize> {
    x: [f64; N],
    f: f64,
}

impl<const N: usize> BestTracker<N> {
    fn new() -> Self {
        Self {
            x: [0.0; N],
            f: f64::NEG_INFINITY,
        }
    }

    fn observe(&mut self, x: &[f64; N], f: f64) {
        if f > self.f {
            self.f = f;
            self.x = *x;
        }
    }
}

/// Maximizes `f` over `[lo, hi]` by a uniform grid of `grid_points` samples
/// followed by golden-section refinement around the best grid point.
///
/// The caller chooses the coordinate; passing log-transformed bounds makes
/// the grid log-uniform in the original parameter. Returns `(argmax, max)`
/// over all evaluated points.
pub(crate) fn grid_then_golden_max<F>(
    mut f: F,
    lo: f64,
    hi: f64,
    grid_points: usize,
    tol: f64,
) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    assert!(hi > lo && grid_points >= 2);
    let mut best = BestTracker::<1>::new();
    let mut eval = |x: f64| {
        let v = f(x);
        best.observe(&[x], v);
        v
    };

    let step = (hi - lo) / (grid_points - 1) as f64;
    let mut best_idx = 0;
    let mut best_val = f64::NEG_INFINITY;
    for i in 0..grid_points {
        let x = if i + 1 == grid_points { hi } else { lo + i as f64 * step };
        let v = eval(x);
        if v > best_val {
            best_val = v;
            best_idx = i;
        }
    }

    // Refine inside the two grid cells adjacent to the winner.
    let mut a = lo + best_idx.saturating_sub(1) as f64 * step;
    let mut b = if best_idx + 1 >= grid_points {
        hi
    } else {
        lo + (best_idx + 1) as f64 * step
    };
    let invphi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = b - invphi * (b - a);
    let mut d = a + invphi * (b - a);
    let mut fc = eval(c);
    let mut fd = eval(d);
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = eval(d);
        }
    }

    (best.x[0], best.f)
}

/// Nelder-Mead simplex maximization with the classic coefficients
/// (reflection 1, expansion 2, contraction 0.5, shrink 0.5).
///
/// The simplex starts at `start` offset by `step` along each axis. Vertices
/// are ordered by a stable sort, so ties resolve identically on every run.
/// Stops when the simplex's objective spread falls below `tol` or after
/// `max_evals` objective evaluations; returns the best evaluated point.
pub(crate) fn nelder_mead_max<const N: usize, F>(
    mut f: F,
    start: [f64; N],
    step: [f64; N],
    tol: f64,
    max_evals: usize,
) -> ([f64; N], f64)
where
    F: FnMut(&[f64; N]) -> f64,
{
    let mut best = BestTracker::<N>::new();
    let evals = std::cell::Cell::new(0usize);
    let mut eval = |x: &[f64; N]| {
        let v = f(x);
        best.observe(x, v);
        evals.set(evals.get() + 1);
        v
    };

    let mut simplex: Vec<([f64; N], f64)> = Vec::with_capacity(N + 1);
    let v0 = (start, eval(&start));
    simplex.push(v0);
    for i in 0..N {
        let mut x = start;
        x[i] += step[i];
        let fx = eval(&x);
        simplex.push((x, fx));
    }

    loop {
        // Best first. Stable sort keeps tied vertices in insertion order.
        simplex.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
        let spread = simplex[0].1 - simplex[N].1;
        if spread <= tol || evals.get() >= max_evals {
            break;
        }

        let mut centroid = [0.0; N];
        for (x, _) in &simplex[..N] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi;
            }
        }
        for c in centroid.iter_mut() {
            *c /= N as f64;
        }
        let worst = simplex[N];

        let mut reflected = [0.0; N];
        for i in 0..N {
            reflected[i] = centroid[i] + (centroid[i] - worst.0[i]);
        }
        let fr = eval(&reflected);

        if fr > simplex[0].1 {
            let mut expanded = [0.0; N];
            for i in 0..N {
                expanded[i] = centroid[i] + 2.0 * (centroid[i] - worst.0[i]);
            }
            let fe = eval(&expanded);
            simplex[N] = if fe > fr {
                (expanded, fe)
            } else {
                (reflected, fr)
            };
            continue;
        }
        if fr > simplex[N - 1].1 {
            simplex[N] = (reflected, fr);
            continue;
        }

        let mut contracted = [0.0; N];
        if fr > worst.1 {
            for i in 0..N {
                contracted[i] = centroid[i] + 0.5 * (reflected[i] - centroid[i]);
            }
            let fc = eval(&contracted);
            if fc >= fr {
                simplex[N] = (contracted, fc);
                continue;
            }
        } else {
            for i in 0..N {
                contracted[i] = centroid[i] + 0.5 * (worst.0[i] - centroid[i]);
            }
            let fc = eval(&contracted);
            if fc > worst.1 {
                simplex[N] = (contracted, fc);
                continue;
            }
        }

        // Shrink toward the best vertex.
        let anchor = simplex[0].0;
        for (x, fx) in simplex.iter_mut().skip(1) {
            for i in 0..N {
                x[i] = anchor[i] + 0.5 * (x[i] - anchor[i]);
            }
            *fx = eval(x);
        }
    }

    (best.x, best.f)
}
