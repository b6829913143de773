//! Model file container.
//!
//! ```text
//! "GDIM1"                      magic, 5 bytes
//! u32 format version           = 1
//! u32 n, n bytes               config block (JSON)
//! u64 hash seed
//! u32 feature_dim, u32 embed_dim
//! u32 k, k × (u8 dimension, u8 label, embed_dim × f32)   class embeddings
//! feature_dim × embed_dim × f32                          feature embeddings
//! ```
//!
//! All integers and floats are little-endian.

use std::fs;
use std::path::Path;

use super::model::{BiEncoderModel, TrainConfig};
use crate::error::{Error, Result};
use crate::labels::{ClassId, Dimension, GenderLabel};

pub const MAGIC: &[u8; 5] = b"GDIM1";
pub const FORMAT_VERSION: u32 = 1;

fn put_u32(buf: &mut Vec<u8>, v: usize) {
    buf.extend_from_slice(&(v as u32).to_le_bytes());
}

fn put_f32s(buf: &mut Vec<u8>, values: &[f32]) {
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
}

impl BiEncoderModel {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let config = serde_json::to_vec(&self.config)?;
        let classes = self.classes();
        let mut buf = Vec::with_capacity(64 + config.len() + 4 * self.feature_embeddings.len());
        buf.extend_from_slice(MAGIC);
        put_u32(&mut buf, FORMAT_VERSION as usize);
        put_u32(&mut buf, config.len());
        buf.extend_from_slice(&config);
        buf.extend_from_slice(&self.hash_seed.to_le_bytes());
        put_u32(&mut buf, self.feature_dim());
        put_u32(&mut buf, self.embed_dim());
        put_u32(&mut buf, classes.len());
        for c in classes {
            buf.push(c.dimension.index() as u8);
            buf.push((c.index() % 3) as u8);
            put_f32s(&mut buf, self.class_embedding(c));
        }
        put_f32s(&mut buf, &self.feature_embeddings);
        Ok(buf)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, at: 0 };
        let magic = r.take(5)?;
        if magic != MAGIC {
            if magic.starts_with(b"GDIM") {
                return Err(Error::VersionMismatch {
                    expected: String::from_utf8_lossy(MAGIC).into_owned(),
                    found: String::from_utf8_lossy(magic).into_owned(),
                });
            }
            return Err(Error::ModelFormat("not a model file (bad magic)".into()));
        }
        let version = r.u32()?;
        if version != FORMAT_VERSION {
            return Err(Error::VersionMismatch {
                expected: FORMAT_VERSION.to_string(),
                found: version.to_string(),
            });
        }
        let config_len = r.u32()? as usize;
        let config: TrainConfig = serde_json::from_slice(r.take(config_len)?)
            .map_err(|e| Error::ModelFormat(format!("config block: {e}")))?;
        config.validate()?;
        let hash_seed = u64::from_le_bytes(r.take(8)?.try_into().expect("8 bytes"));
        let feature_dim = r.u32()? as usize;
        let embed_dim = r.u32()? as usize;
        if feature_dim != config.feature_dim || embed_dim != config.embed_dim {
            return Err(Error::ModelFormat(
                "matrix shape disagrees with config block".into(),
            ));
        }
        let mut class_embeddings = vec![0.0f32; 9 * embed_dim];
        let n_classes = r.u32()? as usize;
        for _ in 0..n_classes {
            let dim = *Dimension::ALL
                .get(r.u8()? as usize)
                .ok_or_else(|| Error::ModelFormat("bad class dimension".into()))?;
            let label = *GenderLabel::CLASSES
                .get(r.u8()? as usize)
                .ok_or_else(|| Error::ModelFormat("bad class label".into()))?;
            let k = ClassId {
                dimension: dim,
                label,
            }
            .index()
                * embed_dim;
            class_embeddings[k..k + embed_dim].copy_from_slice(&r.f32s(embed_dim)?);
        }
        let feature_embeddings = r.f32s(feature_dim * embed_dim)?;
        if r.at != bytes.len() {
            return Err(Error::ModelFormat("trailing bytes".into()));
        }
        Ok(BiEncoderModel {
            config,
            hash_seed,
            feature_embeddings,
            class_embeddings,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        BiEncoderModel::from_bytes(&bytes)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .at
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::ModelFormat("truncated file".into()))?;
        let s = &self.bytes[self.at..end];
        self.at = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(
            self.take(4)?.try_into().expect("4 bytes"),
        ))
    }

    fn f32s(&mut self, n: usize) -> Result<Vec<f32>> {
        let raw = self.take(
            n.checked_mul(4)
                .ok_or_else(|| Error::ModelFormat("size overflow".into()))?,
        )?;
        Ok(raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect())
    }
}
