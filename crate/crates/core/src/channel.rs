//! Random sparse FIR channels and ±1 training sequences.

use std::io::{self, Write};

use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Ground-truth channel for one Monte Carlo run.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    taps: Vec<f64>,
    support: Vec<usize>,
}

impl ChannelRealization {
    /// Builds a realization from explicit taps; the support is every index
    /// holding a nonzero tap.
    pub fn from_taps(taps: Vec<f64>) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::Empty("taps"));
        }
        let support: Vec<usize> = taps
            .iter()
            .enumerate()
            .filter(|(_, &w)| w != 0.0)
            .map(|(i, _)| i)
            .collect();
        if support.is_empty() {
            return Err(Error::param("taps", "channel has no nonzero tap"));
        }
        Ok(Self { taps, support })
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    /// Sorted indices of the nonzero taps.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn sparsity(&self) -> usize {
        self.support.len()
    }

    pub fn energy(&self) -> f64 {
        self.taps.iter().map(|w| w * w).sum()
    }

    /// Rescales this realization to unit energy.
    pub fn normalize_energy(&mut self) {
        let norm = self.energy().sqrt();
        if norm > 0.0 {
            self.taps.iter_mut().for_each(|w| *w /= norm);
        }
    }
}

/// Draws a length-`n` channel with `k` nonzero taps.
///
/// The support is uniform without replacement; nonzero taps are i.i.d.
/// `N(0, 1/k)`, so `E‖w‖² = 1`. The support indices are drawn first, then the
/// tap values in ascending index order.
pub fn generate_channel<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    rng: &mut R,
) -> Result<ChannelRealization> {
    if k < 1 || k > n {
        return Err(Error::param(
            "k",
            format!("sparsity must satisfy 1 <= k <= n = {n}, got {k}"),
        ));
    }
    let mut support = index::sample(rng, n, k).into_vec();
    support.sort_unstable();
    let std = (1.0 / k as f64).sqrt();
    let mut taps = vec![0.0; n];
    for &i in &support {
        let g: f64 = rng.sample(StandardNormal);
        taps[i] = g * std;
    }
    Ok(ChannelRealization { taps, support })
}

/// Pseudo-random binary training sequence with values in `{-1, +1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSignal {
    samples: Vec<f64>,
}

impl TrainingSignal {
    pub fn from_samples(samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Empty("training signal"));
        }
        if samples.iter().any(|&s| s != 1.0 && s != -1.0) {
            return Err(Error::param(
                "samples",
                "training values must be exactly ±1",
            ));
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Precomputes every regressor of length `taps` as contiguous slices.
    pub fn regressors(&self, taps: usize) -> Regressors {
        // Reversed signal followed by `taps - 1` zeros of prehistory, so the
        // window for time n is rev[len-1-n .. len-1-n+taps].
        let mut buffer: Vec<f64> = self.samples.iter().rev().copied().collect();
        buffer.extend(std::iter::repeat_n(0.0, taps.saturating_sub(1)));
        Regressors {
            buffer,
            signal_len: self.samples.len(),
            taps,
        }
    }
}

pub fn generate_training<R: Rng + ?Sized>(length: usize, rng: &mut R) -> Result<TrainingSignal> {
    if length == 0 {
        return Err(Error::param("length", "training length must be >= 1"));
    }
    let samples = (0..length)
        .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
        .collect();
    Ok(TrainingSignal { samples })
}

/// Sliding regressor windows over a [`TrainingSignal`], newest sample first.
#[derive(Debug, Clone)]
pub struct Regressors {
    buffer: Vec<f64>,
    signal_len: usize,
    taps: usize,
}

impl Regressors {
    pub fn taps(&self) -> usize {
        self.taps
    }

    /// Number of valid time indices.
    pub fn len(&self) -> usize {
        self.signal_len
    }

    pub fn is_empty(&self) -> bool {
        self.signal_len == 0
    }

    /// `[s(n), s(n-1), ..., s(n-taps+1)]`, reading zero before time 0.
    pub fn at(&self, n: usize) -> Result<&[f64]> {
        if n >= self.signal_len {
            return Err(Error::param(
                "n",
                format!("time index {n} beyond signal length {}", self.signal_len),
            ));
        }
        let start = self.signal_len - 1 - n;
        Ok(&self.buffer[start..start + self.taps])
    }
}

/// Regressor `x(n)` of length `taps` with zero prehistory.
pub fn regressor_at(signal: &TrainingSignal, n: usize, taps: usize) -> Result<Vec<f64>> {
    if n >= signal.len() {
        return Err(Error::param(
            "n",
            format!("time index {n} beyond signal length {}", signal.len()),
        ));
    }
    Ok((0..taps)
        .map(|j| n.checked_sub(j).map_or(0.0, |i| signal.samples[i]))
        .collect())
}

/// Writes `run_id,tap_index,value` rows for every nonzero tap.
pub fn write_channel_dump<'a, W, I>(mut out: W, channels: I) -> io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = (u64, &'a ChannelRealization)>,
{
    writeln!(out, "run_id,tap_index,value")?;
    for (run_id, channel) in channels {
        for &i in channel.support() {
            writeln!(out, "{run_id},{i},{}", channel.taps[i])?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sparse_channel_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ch = generate_channel(80, 4, &mut rng).unwrap();
        assert_eq!(ch.len(), 80);
        assert_eq!(ch.taps().iter().filter(|&&w| w != 0.0).count(), 4);
        assert_eq!(ch.taps().iter().filter(|&&w| w == 0.0).count(), 76);
        assert!(ch.support().windows(2).all(|p| p[0] < p[1]));
        assert!(ch.support().iter().all(|&i| ch.taps()[i] != 0.0));
    }

    #[test]
    fn single_tap_channel() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut energy = 0.0;
        for _ in 0..20_000 {
            let ch = generate_channel(1, 1, &mut rng).unwrap();
            assert_eq!(ch.support(), &[0]);
            energy += ch.energy();
        }
        // unit variance single tap
        assert!((energy / 20_000.0 - 1.0).abs() < 0.05);
    }

    #[test]
    fn rejects_bad_sparsity() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(generate_channel(8, 0, &mut rng).is_err());
        assert!(generate_channel(8, 9, &mut rng).is_err());
    }

    #[test]
    fn normalization_gives_unit_energy() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut ch = generate_channel(80, 8, &mut rng).unwrap();
        ch.normalize_energy();
        assert!((ch.energy() - 1.0).abs() < 1e-12);
        assert_eq!(ch.sparsity(), 8);
    }

    #[test]
    fn training_values_and_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let short = generate_training(10, &mut rng).unwrap();
        assert_eq!(short.len(), 10);
        assert!(short.samples().iter().all(|&s| s == 1.0 || s == -1.0));

        let long = generate_training(1_000_000, &mut rng).unwrap();
        let mean: f64 = long.samples().iter().sum::<f64>() / 1e6;
        let power: f64 = long.samples().iter().map(|s| s * s).sum::<f64>() / 1e6;
        assert!(mean.abs() < 0.004, "mean {mean}");
        assert_eq!(power, 1.0);
        assert!(generate_training(0, &mut rng).is_err());
    }

    #[test]
    fn regressor_windows() {
        let signal = TrainingSignal::from_samples(vec![1.0, -1.0, 1.0, 1.0, -1.0]).unwrap();
        assert_eq!(regressor_at(&signal, 0, 3).unwrap(), vec![1.0, 0.0, 0.0]);
        assert_eq!(regressor_at(&signal, 2, 3).unwrap(), vec![1.0, -1.0, 1.0]);
        let a = regressor_at(&signal, 3, 3).unwrap();
        let b = regressor_at(&signal, 4, 3).unwrap();
        assert_eq!(a[..2], b[1..]);
        assert!(regressor_at(&signal, 5, 3).is_err());
    }

    #[test]
    fn precomputed_windows_match_direct_indexing() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let signal = generate_training(50, &mut rng).unwrap();
        let windows = signal.regressors(7);
        for n in 0..50 {
            assert_eq!(
                windows.at(n).unwrap(),
                regressor_at(&signal, n, 7).unwrap().as_slice()
            );
        }
        assert!(windows.at(50).is_err());
    }

    #[test]
    fn from_samples_validates() {
        assert!(TrainingSignal::from_samples(vec![]).is_err());
        assert!(TrainingSignal::from_samples(vec![1.0, 0.5]).is_err());
        assert!(ChannelRealization::from_taps(vec![0.0, 0.0]).is_err());
        let ch = ChannelRealization::from_taps(vec![0.0, 0.3, 0.0, -0.1]).unwrap();
        assert_eq!(ch.support(), &[1, 3]);
    }

    #[test]
    fn channel_dump_omits_zeros() {
        let ch = ChannelRealization::from_taps(vec![0.0, 0.5, 0.0, -0.25]).unwrap();
        let mut buf = Vec::new();
        write_channel_dump(&mut buf, [(7, &ch)]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "run_id,tap_index,value\n7,1,0.5\n7,3,-0.25\n"
        );
    }
}
