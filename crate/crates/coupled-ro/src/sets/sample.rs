//! Hit-and-run sampling over full-dimensional uncertainty sets.
//!
//! Walks start at the Chebyshev center, burn in for `100 * dim` steps, and
//! thin by `dim` steps between samples. The generator is an explicitly
//! seeded counter-based RNG, so a fixed seed reproduces the samples bit for
//! bit. The optional boundary rescaling scales each sample outward from the
//! origin until the first atom becomes tight.

use super::{chebyshev_center, SetAtom, UncertaintySpec};
use crate::error::{Error, Result};
use crate::linalg::dot;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub fn hit_and_run_sample(
    spec: &UncertaintySpec,
    count: usize,
    seed: u64,
    rescale_to_boundary: bool,
) -> Result<Vec<Vec<f64>>> {
    let d = spec.dim;
    let (mut point, _radius) = chebyshev_center(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let burn_in = 100 * d;
    let thin = d;
    let step = |point: &mut Vec<f64>, rng: &mut ChaCha8Rng| -> Result<()> {
        let dir = random_direction(d, rng);
        let (lo, hi) = chord(spec, point, &dir)?;
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::UnboundedPolyhedron);
        }
        if hi - lo > 1e-12 {
            let t = rng.gen_range(lo..hi);
            for j in 0..d {
                point[j] += t * dir[j];
            }
        }
        Ok(())
    };
    for _ in 0..burn_in {
        step(&mut point, &mut rng)?;
    }
    while out.len() < count {
        for _ in 0..thin {
            step(&mut point, &mut rng)?;
        }
        let sample = if rescale_to_boundary {
            let t = spec.ray_upper(&point);
            if t.is_finite() {
                point.iter().map(|v| v * t).collect()
            } else {
                point.clone()
            }
        } else {
            point.clone()
        };
        out.push(sample);
    }
    Ok(out)
}

fn random_direction(d: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        // Box-Muller pairs; normalized Gaussian is uniform on the sphere.
        let mut v = Vec::with_capacity(d + 1);
        while v.len() < d {
            let u1: f64 = rng.gen_range(1e-12..1.0);
            let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let r = (-2.0 * u1.ln()).sqrt();
            v.push(r * u2.cos());
            v.push(r * u2.sin());
        }
        v.truncate(d);
        let n = crate::linalg::norm2(&v);
        if n > 1e-12 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

/// Feasible interval `[lo, hi]` for `point + t * dir`.
fn chord(spec: &UncertaintySpec, point: &[f64], dir: &[f64]) -> Result<(f64, f64)> {
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for (s, atom) in spec.scoped_atoms() {
        let p = &point[s.offset..s.offset + s.len];
        let v = &dir[s.offset..s.offset + s.len];
        match atom {
            SetAtom::L2Ball { radius } => {
                // ||p + t v||^2 = r^2
                let a = dot(v, v);
                if a < 1e-300 {
                    continue;
                }
                let b = 2.0 * dot(p, v);
                let c = dot(p, p) - radius * radius;
                let disc = b * b - 4.0 * a * c;
                if disc < 0.0 {
                    return Err(Error::EmptyInterior);
                }
                let sq = disc.sqrt();
                lo = lo.max((-b - sq) / (2.0 * a));
                hi = hi.min((-b + sq) / (2.0 * a));
            }
            _ => {
                for (row, rhs) in atom.local_rows(s.len).unwrap() {
                    let slope = dot(&row, v);
                    let slack = rhs - dot(&row, p);
                    if slope.abs() <= 1e-12 {
                        continue;
                    }
                    let t = slack / slope;
                    if slope > 0.0 {
                        hi = hi.min(t);
                    } else {
                        lo = lo.max(t);
                    }
                }
            }
        }
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::tests::scenario_a;

    #[test]
    fn box_samples_are_members() {
        let spec = UncertaintySpec::from_atom(2, SetAtom::unit_box(2));
        let samples = hit_and_run_sample(&spec, 100, 7, false).unwrap();
        assert_eq!(samples.len(), 100);
        for s in &samples {
            assert!(spec.membership(s, 1e-9).unwrap());
        }
    }

    #[test]
    fn rescaled_samples_sit_on_boundary() {
        let spec = scenario_a(1.5);
        let samples = hit_and_run_sample(&spec, 60, 3, true).unwrap();
        for s in &samples {
            assert!(spec.membership(s, 1e-6).unwrap());
            let g = spec.gauge(s).unwrap();
            assert!((g - 1.0).abs() <= 1e-6, "gauge {g}");
        }
    }

    #[test]
    fn fixed_seed_reproduces_samples_bitwise() {
        let spec = scenario_a(1.5);
        let a = hit_and_run_sample(&spec, 25, 99, true).unwrap();
        let b = hit_and_run_sample(&spec, 25, 99, true).unwrap();
        assert_eq!(a, b);
        let c = hit_and_run_sample(&spec, 25, 100, true).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn ball_coupled_sampling() {
        let spec = UncertaintySpec::from_atom(2, SetAtom::unit_box(2))
            .intersect(vec![SetAtom::L2Ball { radius: 0.9 }])
            .unwrap();
        let samples = hit_and_run_sample(&spec, 50, 11, false).unwrap();
        for s in &samples {
            assert!(spec.membership(s, 1e-9).unwrap());
        }
    }

    #[test]
    fn empty_interior_detected() {
        // Degenerate slab with zero width.
        let spec = UncertaintySpec::from_atom(
            2,
            SetAtom::Box { lower: vec![0.0, 0.5], upper: vec![1.0, 0.5] },
        );
        assert!(matches!(
            hit_and_run_sample(&spec, 5, 1, false),
            Err(Error::EmptyInterior)
        ));
    }
}
