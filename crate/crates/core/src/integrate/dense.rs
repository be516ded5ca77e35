use super::State;

/// Cubic Hermite interpolant over one accepted step.
#[derive(Debug, Clone, Copy)]
pub struct HermiteStep<const N: usize> {
    pub t0: f64,
    pub t1: f64,
    pub y0: State<N>,
    pub y1: State<N>,
    pub f0: State<N>,
    pub f1: State<N>,
}

impl<const N: usize> HermiteStep<N> {
    pub fn h(&self) -> f64 {
        self.t1 - self.t0
    }

    /// Interpolated state at normalized position `theta ∈ [0, 1]`.
    pub fn at_theta(&self, theta: f64) -> State<N> {
        let h = self.h();
        let t2 = theta * theta;
        let t3 = t2 * theta;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + theta;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        self.y0 * h00 + self.f0 * (h10 * h) + self.y1 * h01 + self.f1 * (h11 * h)
    }

    pub fn at(&self, t: f64) -> State<N> {
        let h = self.h();
        if h == 0.0 {
            return self.y0;
        }
        self.at_theta((t - self.t0) / h)
    }

    /// Time derivative of the interpolant at `theta`.
    pub fn derivative_at_theta(&self, theta: f64) -> State<N> {
        let h = self.h();
        let t2 = theta * theta;
        let d00 = 6.0 * t2 - 6.0 * theta;
        let d10 = 3.0 * t2 - 4.0 * theta + 1.0;
        let d01 = -6.0 * t2 + 6.0 * theta;
        let d11 = 3.0 * t2 - 2.0 * theta;
        (self.y0 * d00 + self.y1 * d01) / h + self.f0 * d10 + self.f1 * d11
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_cubics_exactly() {
        // y = t^3 - 2t, y' = 3t^2 - 2
        let y = |t: f64| State::<1>::new(t * t * t - 2.0 * t);
        let f = |t: f64| State::<1>::new(3.0 * t * t - 2.0);
        let s = HermiteStep {
            t0: 0.5,
            t1: 1.75,
            y0: y(0.5),
            y1: y(1.75),
            f0: f(0.5),
            f1: f(1.75),
        };
        for i in 0..=10 {
            let t = 0.5 + 1.25 * i as f64 / 10.0;
            assert!((s.at(t)[0] - y(t)[0]).abs() < 1e-13);
            let theta = (t - 0.5) / 1.25;
            assert!((s.derivative_at_theta(theta)[0] - f(t)[0]).abs() < 1e-12);
        }
    }
}
