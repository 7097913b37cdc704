use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::s3geom::{axpy4, dot4, norm4, scale4, Point4, Vec4};

use super::SphereMap;

#[derive(Clone, Debug)]
struct Mode {
    amplitude: f64,
    wave: Vec4,
    phase: f64,
    direction: Vec4,
}

/// Smooth random perturbation of the identity,
/// `p -> normalize(p + sum_k a_k sin(<w_k, p> + phase_k) v_k)`.
///
/// The amplitudes satisfy `sum |a_k| <= amplitude < 1`, so the straight-line
/// homotopy to the identity never passes through zero and the degree is 1.
#[derive(Clone, Debug)]
pub struct FourierTestMap {
    modes: Vec<Mode>,
}

impl FourierTestMap {
    pub fn default_amplitude() -> f64 {
        0.3
    }

    pub fn default_modes() -> usize {
        4
    }

    pub fn new(seed: u64, amplitude: f64, modes: usize) -> Result<Self> {
        if !(0.0..1.0).contains(&amplitude) {
            return Err(Error::Config(format!(
                "fourier_test amplitude {amplitude} must lie in [0, 1)"
            )));
        }
        if modes == 0 {
            return Err(Error::Config("fourier_test needs at least one mode".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let modes = (0..modes)
            .map(|_| {
                let wave = std::array::from_fn(|_| rng.gen_range(-2.5..2.5));
                let dir: Vec4 = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
                Mode {
                    amplitude: amplitude / modes as f64 * rng.gen_range(0.5..1.0),
                    wave,
                    phase: rng.gen_range(0.0..std::f64::consts::TAU),
                    direction: scale4(1.0 / norm4(&dir), &dir),
                }
            })
            .collect();
        Ok(FourierTestMap { modes })
    }

    fn lift(&self, p: &Vec4) -> Vec4 {
        self.modes.iter().fold(*p, |acc, m| {
            let w = m.amplitude * (dot4(&m.wave, p) + m.phase).sin();
            axpy4(w, &m.direction, &acc)
        })
    }
}

impl SphereMap for FourierTestMap {
    fn apply(&self, p: &Point4) -> Point4 {
        Point4::new(self.lift(p.coords()))
    }

    fn push_forward(&self, p: &Point4, v: &Vec4) -> Option<Vec4> {
        let x = p.coords();
        let f = self.lift(x);
        let df = self.modes.iter().fold(*v, |acc, m| {
            let w = m.amplitude * (dot4(&m.wave, x) + m.phase).cos() * dot4(&m.wave, v);
            axpy4(w, &m.direction, &acc)
        });
        let n = norm4(&f);
        let fh = scale4(1.0 / n, &f);
        Some(scale4(1.0 / n, &axpy4(-dot4(&fh, &df), &fh, &df)))
    }
}
