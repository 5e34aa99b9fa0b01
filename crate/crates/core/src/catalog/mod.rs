//! Seeded random sources, Haar sampling, known exact designs and ensemble
//! file I/O.

mod designs;
mod io;

use nalgebra::DMatrix;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::ComplexMatrix;
use crate::Complex64;

pub use designs::{known_design, DesignName, KnownDesign};
pub use io::{load_ensemble, save_ensemble};

/// Identifies the sampling pipeline in provenance records. Bump when the
/// generator, the stream layout or the sampling algorithms change.
pub const GENERATOR_VERSION: &str = "chacha8-stream/v1";

/// A reproducible random stream: ChaCha8 keyed by `master_seed`, with
/// `stream_id` selecting an independent keystream.
#[derive(Clone, Debug)]
pub struct RngStream {
    master_seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(stream_id);
        RngStream {
            master_seed,
            stream_id,
            rng,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random unit vector in `C^d`: normalized i.i.d. complex Gaussians.
pub fn sample_haar_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<Complex64> {
    assert!(d >= 1, "dimension must be positive");
    loop {
        let mut v: Vec<Complex64> = (0..d).map(|_| complex_gaussian(rng)).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            for z in &mut v {
                *z /= norm;
            }
            return v;
        }
    }
}

/// Haar-random `U(d)` element: QR of a complex Gaussian matrix with the
/// phases of `diag(R)` moved into `Q`.
pub fn sample_haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    assert!(d >= 1, "dimension must be positive");
    let g = DMatrix::<Complex64>::from_fn(d, d, |_, _| complex_gaussian(rng));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 {
            rjj / rjj.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        q.column_mut(j).iter_mut().for_each(|z| *z *= phase);
    }
    ComplexMatrix::from_nalgebra(&q)
}
