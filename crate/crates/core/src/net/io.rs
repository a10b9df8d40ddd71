//! Model file: `"SIAM"`, u32 version, u32 layer count, then per layer
//! u32 kind (0 conv, 1 dense), u32 rank, u32 dims[rank], weights, biases.
//! Integers and f32 values are little-endian.

use super::{Layer, LayerKind, NetError, NetworkParams, Tensor};

pub const MODEL_MAGIC: &[u8; 4] = b"SIAM";
pub const MODEL_VERSION: u32 = 1;

fn push_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

pub fn save_params(params: &NetworkParams) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + params.len() * 4 + 64);
    out.extend_from_slice(MODEL_MAGIC);
    push_u32(&mut out, MODEL_VERSION);
    push_u32(&mut out, 3);
    for layer in params.layers() {
        push_u32(
            &mut out,
            match layer.kind {
                LayerKind::Conv => 0,
                LayerKind::Dense => 1,
            },
        );
        let shape = layer.weights.shape();
        push_u32(&mut out, shape.len() as u32);
        for &d in shape {
            push_u32(&mut out, d as u32);
        }
        for &v in layer.weights.data().iter().chain(&layer.bias) {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn u32(&mut self) -> Result<u32, NetError> {
        let b = self
            .bytes
            .get(self.pos..self.pos + 4)
            .ok_or_else(|| NetError::ModelLength(format!("file ends at byte {}", self.bytes.len())))?;
        self.pos += 4;
        Ok(u32::from_le_bytes(b.try_into().unwrap()))
    }

    fn f32s(&mut self, n: usize) -> Result<Vec<f64>, NetError> {
        let end = n
            .checked_mul(4)
            .and_then(|b| b.checked_add(self.pos))
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| NetError::ModelLength(format!("need {n} more values at byte {}", self.pos)))?;
        let vals = self.bytes[self.pos..end]
            .chunks_exact(4)
            .map(|c| f64::from(f32::from_le_bytes(c.try_into().unwrap())))
            .collect();
        self.pos = end;
        Ok(vals)
    }
}

fn read_layer(cur: &mut Cursor<'_>) -> Result<Layer, NetError> {
    let kind = match cur.u32()? {
        0 => LayerKind::Conv,
        1 => LayerKind::Dense,
        k => return Err(NetError::Malformed(format!("unknown layer kind {k}"))),
    };
    let rank = cur.u32()? as usize;
    let expected_rank = if kind == LayerKind::Conv { 4 } else { 2 };
    if rank != expected_rank {
        return Err(NetError::Malformed(format!("{kind:?} layer with rank {rank}")));
    }
    let dims = (0..rank)
        .map(|_| cur.u32().map(|d| d as usize))
        .collect::<Result<Vec<_>, _>>()?;
    let count = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| NetError::Malformed("layer size overflows".into()))?;
    let weights = cur.f32s(count)?;
    let bias = cur.f32s(dims[0])?;
    Ok(Layer {
        kind,
        weights: Tensor::from_vec(&dims, weights),
        bias,
    })
}

/// Parses a model file. Nothing is returned unless the whole file is valid.
pub fn load_params(bytes: &[u8]) -> Result<NetworkParams, NetError> {
    if bytes.len() < 4 || &bytes[..4] != MODEL_MAGIC {
        return Err(NetError::BadMagic);
    }
    let mut cur = Cursor { bytes, pos: 4 };
    let version = cur.u32()?;
    if version != MODEL_VERSION {
        return Err(NetError::Version(version));
    }
    let layers = cur.u32()?;
    if layers != 3 {
        return Err(NetError::Malformed(format!("expected 3 layers, found {layers}")));
    }
    let conv1 = read_layer(&mut cur)?;
    let conv2 = read_layer(&mut cur)?;
    let dense = read_layer(&mut cur)?;
    if cur.pos != bytes.len() {
        return Err(NetError::ModelLength(format!(
            "{} trailing bytes after last layer",
            bytes.len() - cur.pos
        )));
    }
    let kinds_ok = conv1.kind == LayerKind::Conv && conv2.kind == LayerKind::Conv && dense.kind == LayerKind::Dense;
    let shapes_ok = conv1.inputs() == 1
        && conv2.inputs() == conv1.outputs()
        && conv1.weights.shape()[2..] == [3, 3]
        && conv2.weights.shape()[2..] == [3, 3]
        && dense.inputs() % conv2.outputs() == 0;
    if !kinds_ok || !shapes_ok {
        return Err(NetError::Malformed(
            "layer kinds or shapes do not form conv-conv-dense".into(),
        ));
    }
    let params = NetworkParams { conv1, conv2, dense };
    if !params.is_finite() {
        return Err(NetError::Malformed("non-finite weight".into()));
    }
    Ok(params)
}

impl NetworkParams {
    /// Copy with every value rounded to the nearest f32, i.e. exactly what
    /// [`save_params`] stores.
    pub fn round_to_f32(&self) -> NetworkParams {
        let mut p = self.clone();
        for s in p.slices_mut() {
            s.iter_mut().for_each(|v| *v = f64::from(*v as f32));
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::Architecture;

    fn params() -> NetworkParams {
        NetworkParams::init(Architecture::default(), 15, 84, 3)
            .unwrap()
            .round_to_f32()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let p = params();
        let bytes = save_params(&p);
        assert_eq!(load_params(&bytes).unwrap(), p);
        let raw = NetworkParams::init(Architecture::default(), 9, 12, 1).unwrap();
        let once = save_params(&raw);
        assert_eq!(save_params(&load_params(&once).unwrap()), once);
    }

    #[test]
    fn file_length_matches_layout() {
        let p = params();
        let payload: usize = p
            .layers()
            .iter()
            .map(|l| 8 + 4 * l.weights.shape().len() + 4 * (l.weights.len() + l.bias.len()))
            .sum();
        assert_eq!(save_params(&p).len(), 12 + payload);
    }

    #[test]
    fn corrupt_files_are_rejected() {
        let bytes = save_params(&params());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert_eq!(load_params(&bad), Err(NetError::BadMagic));
        let mut v2 = bytes.clone();
        v2[4] = 2;
        assert_eq!(load_params(&v2), Err(NetError::Version(2)));
        assert!(matches!(
            load_params(&bytes[..bytes.len() - 1]),
            Err(NetError::ModelLength(_))
        ));
        let mut long = bytes;
        long.push(0);
        assert!(matches!(load_params(&long), Err(NetError::ModelLength(_))));
    }
}
