//! Binary checkpoints: encoder weights, optimizer state, and the training
//! configuration, in a little-endian format guarded by a trailing CRC32.
//!
//! Layout: magic `IMLE`, version, dims (m, s', L, per-layer target dims,
//! activation slope), matrices in fixed order (body, head, extra heads,
//! Adam first/second moments per parameter), optimizer scalars, epoch,
//! config echo, CRC32 of everything before it.

use std::path::Path;

use crate::autograd::ActivationSpec;
use crate::error::{InvMlError, Result};
use crate::model::{InvMLEncoder, LossFlags};
use crate::schedule::ScheduleConfig;
use crate::trainer::{AdamState, BatchMode, TrainConfig};
use crate::matrix::Matrix;

const MAGIC: &[u8; 4] = b"IMLE";
pub const FORMAT_VERSION: u32 = 1;

/// Everything needed to resume or evaluate a training run.
#[derive(Clone, Debug)]
pub struct Checkpoint {
    pub version: u32,
    pub encoder: InvMLEncoder,
    pub adam: AdamState,
    pub epoch: u64,
    pub config: TrainConfig,
}

/// Standard CRC-32 (IEEE 802.3, reflected polynomial 0xEDB88320).
pub fn crc32(data: &[u8]) -> u32 {
    let mut crc = 0xffff_ffffu32;
    for &b in data {
        crc ^= b as u32;
        for _ in 0..8 {
            let mask = (crc & 1).wrapping_neg();
            crc = (crc >> 1) ^ (0xedb8_8320 & mask);
        }
    }
    !crc
}

struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn matrix(&mut self, m: &Matrix) {
        for &v in m.data() {
            self.f64(v);
        }
    }
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.data.len() {
            return Err(InvMlError::TruncatedFile {
                expected: self.pos + n,
                got: self.data.len(),
            });
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn matrix(&mut self, rows: usize, cols: usize) -> Result<Matrix> {
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            data.push(self.f64()?);
        }
        // from_raw: checkpoint payloads may legitimately carry non-finite
        // moments only if training diverged, which save() refuses anyway.
        Ok(Matrix::from_raw(rows, cols, data))
    }
}

pub fn serialize(ckpt: &Checkpoint) -> Vec<u8> {
    let enc = &ckpt.encoder;
    let mut w = Writer { buf: Vec::new() };
    w.buf.extend_from_slice(MAGIC);
    w.u32(ckpt.version);
    w.u32(enc.input_dim as u32);
    w.u32(enc.target_dim as u32);
    w.u32(enc.layer_count as u32);
    let dims = enc.padded_dims();
    w.u32(dims.len() as u32);
    for &d in &dims {
        w.u32(d as u32);
    }
    w.f64(enc.activation.alpha);
    for &v in &enc.input_offset {
        w.f64(v);
    }

    for m in &enc.body {
        w.matrix(m);
    }
    w.matrix(&enc.head);
    for h in &enc.extra_heads {
        w.matrix(h);
    }
    for (m, v) in &ckpt.adam.moments {
        w.matrix(m);
        w.matrix(v);
    }
    w.f64(ckpt.adam.lr);
    w.f64(ckpt.adam.beta1);
    w.f64(ckpt.adam.beta2);
    w.f64(ckpt.adam.eps);
    w.u64(ckpt.adam.t);
    w.u64(ckpt.epoch);

    let c = &ckpt.config;
    w.u64(c.k as u64);
    w.u64(c.seed);
    w.u64(c.schedule.epochs_total as u64);
    w.u64(c.log_interval as u64);
    w.f64(c.lr);
    w.f64(c.grad_clip);
    w.f64(c.schedule.alpha0);
    w.f64(c.schedule.beta_min);
    w.f64(c.schedule.beta_max);
    w.f64(c.schedule.gamma0);
    w.f64(c.schedule.mu_min);
    w.f64(c.schedule.mu_max);
    w.f64(c.schedule.push_radius.unwrap_or(f64::NAN));
    let flag_bits = (c.flags.use_orth as u8)
        | (c.flags.use_pad as u8) << 1
        | (c.flags.use_extra as u8) << 2
        | (c.schedule.lis_squared as u8) << 3
        | (c.schedule.push_literal as u8) << 4;
    w.buf.push(flag_bits);
    w.u64(c.schedule.push_subsample.map_or(u64::MAX, |v| v as u64));
    w.u64(match c.batch {
        BatchMode::Full => 0,
        BatchMode::NeighborhoodBlock { block_size } => block_size as u64,
    });

    let crc = crc32(&w.buf);
    w.u32(crc);
    w.buf
}

pub fn deserialize(data: &[u8]) -> Result<Checkpoint> {
    let mut r = Reader { data, pos: 0 };
    let magic = r.take(4)?;
    if magic != MAGIC {
        let got = u32::from_be_bytes(magic.try_into().unwrap());
        let expected = u32::from_be_bytes(*MAGIC);
        return Err(InvMlError::BadMagic { got, expected });
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(InvMlError::VersionMismatch { got: version, expected: FORMAT_VERSION });
    }
    if data.len() < 8 {
        return Err(InvMlError::TruncatedFile { expected: 8, got: data.len() });
    }
    let stored = u32::from_le_bytes(data[data.len() - 4..].try_into().unwrap());
    if crc32(&data[..data.len() - 4]) != stored {
        return Err(InvMlError::ChecksumMismatch);
    }

    let m = r.u32()? as usize;
    let s_prime = r.u32()? as usize;
    let layer_count = r.u32()? as usize;
    let n_dims = r.u32()? as usize;
    if n_dims != layer_count.saturating_sub(2) {
        return Err(InvMlError::DimMismatch(format!(
            "expected {} per-layer dims, found {n_dims}",
            layer_count.saturating_sub(2)
        )));
    }
    let mut dims = Vec::with_capacity(n_dims);
    for _ in 0..n_dims {
        dims.push(r.u32()? as usize);
    }
    let alpha = r.f64()?;
    let mut input_offset = Vec::with_capacity(m);
    for _ in 0..m {
        input_offset.push(r.f64()?);
    }

    let body: Vec<Matrix> =
        (0..layer_count - 1).map(|_| r.matrix(m, m)).collect::<Result<_>>()?;
    let head = r.matrix(s_prime, m)?;
    let extra_heads: Vec<Matrix> = dims.iter().map(|&d| r.matrix(d, m)).collect::<Result<_>>()?;

    let n_params = body.len() + 1 + extra_heads.len();
    let mut shapes: Vec<(usize, usize)> = body.iter().map(|w| w.shape()).collect();
    shapes.push(head.shape());
    shapes.extend(extra_heads.iter().map(|h| h.shape()));
    let mut moments = Vec::with_capacity(n_params);
    for &(rows, cols) in &shapes {
        let fm = r.matrix(rows, cols)?;
        let sm = r.matrix(rows, cols)?;
        moments.push((fm, sm));
    }
    let lr = r.f64()?;
    let beta1 = r.f64()?;
    let beta2 = r.f64()?;
    let eps = r.f64()?;
    let t = r.u64()?;
    let epoch = r.u64()?;

    let k = r.u64()? as usize;
    let seed = r.u64()?;
    let epochs_total = r.u64()? as usize;
    let log_interval = r.u64()? as usize;
    let cfg_lr = r.f64()?;
    let grad_clip = r.f64()?;
    let alpha0 = r.f64()?;
    let beta_min = r.f64()?;
    let beta_max = r.f64()?;
    let gamma0 = r.f64()?;
    let mu_min = r.f64()?;
    let mu_max = r.f64()?;
    let push_radius_raw = r.f64()?;
    let flag_bits = r.take(1)?[0];
    let push_subsample_raw = r.u64()?;
    let batch_raw = r.u64()?;

    let config = TrainConfig {
        k,
        layer_count,
        target_dim: s_prime,
        seed,
        schedule: ScheduleConfig {
            alpha0,
            beta_min,
            beta_max,
            gamma0,
            mu_min,
            mu_max,
            push_radius: if push_radius_raw.is_nan() { None } else { Some(push_radius_raw) },
            lis_squared: flag_bits & 0b0_1000 != 0,
            push_literal: flag_bits & 0b1_0000 != 0,
            push_subsample: if push_subsample_raw == u64::MAX {
                None
            } else {
                Some(push_subsample_raw as usize)
            },
            epochs_total,
        },
        flags: LossFlags {
            use_orth: flag_bits & 0b001 != 0,
            use_pad: flag_bits & 0b010 != 0,
            use_extra: flag_bits & 0b100 != 0,
        },
        lr: cfg_lr,
        grad_clip,
        batch: if batch_raw == 0 {
            BatchMode::Full
        } else {
            BatchMode::NeighborhoodBlock { block_size: batch_raw as usize }
        },
        log_interval,
    };

    Ok(Checkpoint {
        version,
        encoder: InvMLEncoder {
            input_dim: m,
            target_dim: s_prime,
            layer_count,
            body,
            head,
            extra_heads,
            activation: ActivationSpec { alpha },
            input_offset,
        },
        adam: AdamState { lr, beta1, beta2, eps, t, moments },
        epoch,
        config,
    })
}

pub fn save_checkpoint(path: &Path, ckpt: &Checkpoint) -> Result<()> {
    std::fs::write(path, serialize(ckpt))?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let data = std::fs::read(path)?;
    deserialize(&data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::gen_swiss_roll;
    use crate::trainer::train;

    #[test]
    fn crc32_known_vectors() {
        // Published IEEE CRC-32 test vectors.
        assert_eq!(crc32(b""), 0x0000_0000);
        assert_eq!(crc32(b"123456789"), 0xcbf4_3926);
        assert_eq!(crc32(b"The quick brown fox jumps over the lazy dog"), 0x414f_a339);
    }

    fn sample_checkpoint() -> Checkpoint {
        let config = TrainConfig {
            k: 4,
            layer_count: 4,
            target_dim: 2,
            seed: 9,
            schedule: ScheduleConfig { epochs_total: 3, ..Default::default() },
            ..Default::default()
        };
        let ds = gen_swiss_roll(30, 1).unwrap();
        let mut enc =
            InvMLEncoder::new(3, 2, 4, ActivationSpec::default(), config.seed).unwrap();
        train(&mut enc, &ds, &config).unwrap();
        let adam = AdamState::for_encoder(&enc, config.lr);
        Checkpoint { version: FORMAT_VERSION, encoder: enc, adam, epoch: 3, config }
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        let ckpt = sample_checkpoint();
        let bytes = serialize(&ckpt);
        let back = deserialize(&bytes).unwrap();
        for (a, b) in ckpt.encoder.body.iter().zip(&back.encoder.body) {
            assert_eq!(a.data(), b.data());
        }
        assert_eq!(ckpt.encoder.head.data(), back.encoder.head.data());
        assert_eq!(ckpt.epoch, back.epoch);
        assert_eq!(ckpt.config.seed, back.config.seed);
        // And serialization is idempotent: identical bytes.
        assert_eq!(bytes, serialize(&back));
    }

    #[test]
    fn reloaded_encoder_reproduces_forward_bitwise() {
        let ckpt = sample_checkpoint();
        let back = deserialize(&serialize(&ckpt)).unwrap();
        let probe = gen_swiss_roll(10, 5).unwrap();
        let a = ckpt.encoder.forward(&probe.x).unwrap();
        let b = back.encoder.forward(&probe.x).unwrap();
        assert_eq!(a.embedding.data(), b.embedding.data());
    }

    #[test]
    fn truncated_file_rejected() {
        let bytes = serialize(&sample_checkpoint());
        let cut = &bytes[..bytes.len() - 11];
        assert!(matches!(deserialize(cut), Err(InvMlError::ChecksumMismatch)));
    }

    #[test]
    fn bad_magic_rejected() {
        let mut bytes = serialize(&sample_checkpoint());
        bytes[0] = b'X';
        assert!(matches!(deserialize(&bytes), Err(InvMlError::BadMagic { .. })));
    }

    #[test]
    fn version_bump_rejected() {
        let mut bytes = serialize(&sample_checkpoint());
        bytes[4] = 99;
        assert!(matches!(deserialize(&bytes), Err(InvMlError::VersionMismatch { got: 99, .. })));
    }

    #[test]
    fn corrupted_payload_fails_checksum() {
        let mut bytes = serialize(&sample_checkpoint());
        let mid = bytes.len() / 2;
        bytes[mid] ^= 0x40;
        assert!(matches!(deserialize(&bytes), Err(InvMlError::ChecksumMismatch)));
    }

    #[test]
    fn file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        let ckpt = sample_checkpoint();
        save_checkpoint(&path, &ckpt).unwrap();
        let back = load_checkpoint(&path).unwrap();
        assert_eq!(serialize(&ckpt), serialize(&back));
    }
}
