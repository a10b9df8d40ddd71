use super::loss::{contrastive_loss, contrastive_loss_grad, euclidean};
use super::{NetError, Tensor};
use crate::rng::Rng;
use crate::signal::Patch;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerKind {
    /// 3×3 convolution, stride 1, zero padding 1; weights `[out, in, 3, 3]`.
    Conv,
    /// Fully connected; weights `[out, in]`.
    Dense,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub kind: LayerKind,
    pub weights: Tensor,
    pub bias: Vec<f64>,
}

impl Layer {
    pub fn zeros(kind: LayerKind, shape: &[usize]) -> Self {
        Layer {
            kind,
            weights: Tensor::zeros(shape),
            bias: vec![0.0; shape[0]],
        }
    }

    pub fn outputs(&self) -> usize {
        self.weights.shape()[0]
    }

    pub fn inputs(&self) -> usize {
        self.weights.shape()[1]
    }

    fn fans(&self) -> (usize, usize) {
        let s = self.weights.shape();
        let receptive: usize = s[2..].iter().product();
        (s[1] * receptive, s[0] * receptive)
    }
}

/// Layer widths. The default is 16 + 16 filters and a 32-dim embedding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Architecture {
    pub filters1: usize,
    pub filters2: usize,
    pub embedding: usize,
}

impl Default for Architecture {
    fn default() -> Self {
        Architecture {
            filters1: 16,
            filters2: 16,
            embedding: 32,
        }
    }
}

const K: usize = 3;

fn pooled(n: usize) -> usize {
    n / 2
}

/// All weights of one twin; the other twin uses the same values.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    pub conv1: Layer,
    pub conv2: Layer,
    pub dense: Layer,
}

impl NetworkParams {
    pub fn zeros(arch: Architecture, rows: usize, cols: usize) -> Result<Self, NetError> {
        let flat = arch.filters2 * pooled(pooled(rows)) * pooled(pooled(cols));
        if flat == 0 {
            return Err(NetError::InputTooSmall { rows, cols });
        }
        Ok(NetworkParams {
            conv1: Layer::zeros(LayerKind::Conv, &[arch.filters1, 1, K, K]),
            conv2: Layer::zeros(LayerKind::Conv, &[arch.filters2, arch.filters1, K, K]),
            dense: Layer::zeros(LayerKind::Dense, &[arch.embedding, flat]),
        })
    }

    /// Glorot-uniform weights in `±sqrt(6 / (fan_in + fan_out))`, zero biases.
    /// Weights are drawn at f32 precision so the model file stores them exactly.
    pub fn init(arch: Architecture, rows: usize, cols: usize, seed: u64) -> Result<Self, NetError> {
        let mut params = Self::zeros(arch, rows, cols)?;
        let mut rng = Rng::new(seed);
        for layer in params.layers_mut() {
            let (fan_in, fan_out) = layer.fans();
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for w in layer.weights.data_mut() {
                *w = rng.uniform(-limit, limit) as f32 as f64;
            }
        }
        Ok(params)
    }

    pub fn zeros_like(&self) -> Self {
        let z = |l: &Layer| Layer::zeros(l.kind, l.weights.shape());
        NetworkParams {
            conv1: z(&self.conv1),
            conv2: z(&self.conv2),
            dense: z(&self.dense),
        }
    }

    pub fn layers(&self) -> [&Layer; 3] {
        [&self.conv1, &self.conv2, &self.dense]
    }

    pub fn layers_mut(&mut self) -> [&mut Layer; 3] {
        [&mut self.conv1, &mut self.conv2, &mut self.dense]
    }

    pub fn architecture(&self) -> Architecture {
        Architecture {
            filters1: self.conv1.outputs(),
            filters2: self.conv2.outputs(),
            embedding: self.dense.outputs(),
        }
    }

    /// Total number of scalar parameters.
    pub fn len(&self) -> usize {
        self.layers().iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Every parameter slice in a fixed order (weights then bias per layer).
    pub fn slices(&self) -> [&[f64]; 6] {
        [
            self.conv1.weights.data(),
            &self.conv1.bias,
            self.conv2.weights.data(),
            &self.conv2.bias,
            self.dense.weights.data(),
            &self.dense.bias,
        ]
    }

    pub fn slices_mut(&mut self) -> [&mut [f64]; 6] {
        let NetworkParams { conv1, conv2, dense } = self;
        [
            conv1.weights.data_mut(),
            &mut conv1.bias,
            conv2.weights.data_mut(),
            &mut conv2.bias,
            dense.weights.data_mut(),
            &mut dense.bias,
        ]
    }

    pub fn get_flat(&self, mut index: usize) -> f64 {
        for s in self.slices() {
            if index < s.len() {
                return s[index];
            }
            index -= s.len();
        }
        panic!("parameter index out of range");
    }

    pub fn set_flat(&mut self, mut index: usize, value: f64) {
        for s in self.slices_mut() {
            if index < s.len() {
                s[index] = value;
                return;
            }
            index -= s.len();
        }
        panic!("parameter index out of range");
    }

    /// `self += scale · other`, element-wise.
    pub fn add_scaled(&mut self, other: &NetworkParams, scale: f64) {
        for (dst, src) in self.slices_mut().into_iter().zip(other.slices()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += scale * s;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.slices().iter().all(|s| s.iter().all(|v| v.is_finite()))
    }

    fn check_input(&self, patch: &Patch) -> Result<(), NetError> {
        let arch = self.architecture();
        let flat = arch.filters2 * pooled(pooled(patch.rows)) * pooled(pooled(patch.cols));
        if self.conv1.inputs() != 1 || flat != self.dense.inputs() || patch.data.len() != patch.rows * patch.cols {
            return Err(NetError::ShapeMismatch {
                expected: format!("flattened size {}", self.dense.inputs()),
                got: format!("{}×{} patch (flattened size {flat})", patch.rows, patch.cols),
            });
        }
        Ok(())
    }
}

/// Intermediate activations kept for backpropagation.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    rows: usize,
    cols: usize,
    z1: Vec<f64>,
    pool1: Vec<f64>,
    arg1: Vec<usize>,
    z2: Vec<f64>,
    pool2: Vec<f64>,
    arg2: Vec<usize>,
    pub embedding: Vec<f64>,
}

impl ForwardTrace {
    /// Signature of every ReLU sign and pooling choice; two inputs with the
    /// same pattern lie in the same linear region of the network.
    pub fn activation_pattern(&self) -> Vec<u64> {
        let mut pattern = Vec::new();
        let mut push_bits = |bits: &mut dyn Iterator<Item = bool>| {
            let mut word = 0u64;
            let mut n = 0;
            for b in bits {
                word = (word << 1) | b as u64;
                n += 1;
                if n == 64 {
                    pattern.push(word);
                    word = 0;
                    n = 0;
                }
            }
            pattern.push(word);
        };
        push_bits(&mut self.z1.iter().map(|&z| z > 0.0));
        push_bits(&mut self.z2.iter().map(|&z| z > 0.0));
        pattern.extend(self.arg1.iter().chain(&self.arg2).map(|&a| a as u64));
        pattern
    }
}

/// Zero-padded 3×3 convolution of `input` (`[in, h, w]`) into `out`
/// (`[out, h, w]`), which must hold zeros.
fn conv_forward(layer: &Layer, input: &[f64], h: usize, w: usize, out: &mut [f64]) {
    let (n_out, n_in) = (layer.outputs(), layer.inputs());
    let weights = layer.weights.data();
    let plane = h * w;
    for o in 0..n_out {
        let dst = &mut out[o * plane..(o + 1) * plane];
        dst.iter_mut().for_each(|v| *v = layer.bias[o]);
        for i in 0..n_in {
            let src = &input[i * plane..(i + 1) * plane];
            for ky in 0..K {
                for kx in 0..K {
                    let wv = weights[((o * n_in + i) * K + ky) * K + kx];
                    let x0 = 1usize.saturating_sub(kx);
                    let x1 = (w + 1 - kx).min(w);
                    if x0 >= x1 {
                        continue;
                    }
                    for y in 0..h {
                        let sy = y + ky;
                        if sy < 1 || sy > h {
                            continue;
                        }
                        let srow = &src[(sy - 1) * w + x0 + kx - 1..(sy - 1) * w + x1 + kx - 1];
                        let drow = &mut dst[y * w + x0..y * w + x1];
                        for (d, s) in drow.iter_mut().zip(srow) {
                            *d += wv * s;
                        }
                    }
                }
            }
        }
    }
}

/// Accumulates weight/bias gradients of a conv layer and, when `d_input` is
/// given, the gradient with respect to its input.
fn conv_backward(
    layer: &Layer,
    input: &[f64],
    d_out: &[f64],
    h: usize,
    w: usize,
    grad: &mut Layer,
    mut d_input: Option<&mut [f64]>,
) {
    let (n_out, n_in) = (layer.outputs(), layer.inputs());
    let weights = layer.weights.data();
    let plane = h * w;
    for o in 0..n_out {
        let g = &d_out[o * plane..(o + 1) * plane];
        grad.bias[o] += g.iter().sum::<f64>();
        for i in 0..n_in {
            let src = &input[i * plane..(i + 1) * plane];
            for ky in 0..K {
                for kx in 0..K {
                    let widx = ((o * n_in + i) * K + ky) * K + kx;
                    let x0 = 1usize.saturating_sub(kx);
                    let x1 = (w + 1 - kx).min(w);
                    if x0 >= x1 {
                        continue;
                    }
                    let wv = weights[widx];
                    let mut acc = 0.0;
                    for y in 0..h {
                        let sy = y + ky;
                        if sy < 1 || sy > h {
                            continue;
                        }
                        let start = (sy - 1) * w + x0 + kx - 1;
                        let span = x1 - x0;
                        let grow = &g[y * w + x0..y * w + x1];
                        let srow = &src[start..start + span];
                        acc += grow.iter().zip(srow).map(|(a, b)| a * b).sum::<f64>();
                        if let Some(dx) = d_input.as_deref_mut() {
                            let drow = &mut dx[i * plane + start..i * plane + start + span];
                            for (d, gv) in drow.iter_mut().zip(grow) {
                                *d += wv * gv;
                            }
                        }
                    }
                    grad.weights.data_mut()[widx] += acc;
                }
            }
        }
    }
}

/// ReLU followed by 2×2/stride-2 max pooling. Returns pooled values and the
/// flat index (into `z`) of each window's maximum; ties keep the first.
fn relu_pool(z: &[f64], channels: usize, h: usize, w: usize) -> (Vec<f64>, Vec<usize>) {
    let (ph, pw) = (pooled(h), pooled(w));
    let mut out = Vec::with_capacity(channels * ph * pw);
    let mut arg = Vec::with_capacity(channels * ph * pw);
    for c in 0..channels {
        let base = c * h * w;
        for py in 0..ph {
            for px in 0..pw {
                let mut best = base + 2 * py * w + 2 * px;
                for (dy, dx) in [(0, 1), (1, 0), (1, 1)] {
                    let idx = base + (2 * py + dy) * w + 2 * px + dx;
                    // NaN wins so non-finite activations surface in the loss
                    if z[idx] > z[best] || z[idx].is_nan() {
                        best = idx;
                    }
                }
                let v = z[best];
                out.push(if v.is_nan() { v } else { v.max(0.0) });
                arg.push(best);
            }
        }
    }
    (out, arg)
}

/// Routes pooled gradients back to the winning positions, masked by ReLU.
fn unpool(d_pooled: &[f64], arg: &[usize], z: &[f64]) -> Vec<f64> {
    let mut d = vec![0.0; z.len()];
    for (&g, &idx) in d_pooled.iter().zip(arg) {
        if z[idx] > 0.0 {
            d[idx] += g;
        }
    }
    d
}

impl NetworkParams {
    pub fn forward_trace(&self, patch: &Patch) -> Result<ForwardTrace, NetError> {
        self.check_input(patch)?;
        let (h, w) = (patch.rows, patch.cols);
        let (f1, f2) = (self.conv1.outputs(), self.conv2.outputs());

        let mut z1 = vec![0.0; f1 * h * w];
        conv_forward(&self.conv1, &patch.data, h, w, &mut z1);
        let (pool1, arg1) = relu_pool(&z1, f1, h, w);

        let (h1, w1) = (pooled(h), pooled(w));
        let mut z2 = vec![0.0; f2 * h1 * w1];
        conv_forward(&self.conv2, &pool1, h1, w1, &mut z2);
        let (pool2, arg2) = relu_pool(&z2, f2, h1, w1);

        let dense_w = self.dense.weights.data();
        let n_in = self.dense.inputs();
        let embedding = self
            .dense
            .bias
            .iter()
            .enumerate()
            .map(|(j, b)| {
                b + dense_w[j * n_in..(j + 1) * n_in]
                    .iter()
                    .zip(&pool2)
                    .map(|(a, x)| a * x)
                    .sum::<f64>()
            })
            .collect();

        Ok(ForwardTrace {
            rows: h,
            cols: w,
            z1,
            pool1,
            arg1,
            z2,
            pool2,
            arg2,
            embedding,
        })
    }

    /// Accumulates into `grads` the parameter gradient of `d_embedding · G_w(x)`.
    pub fn backward_trace(&self, trace: &ForwardTrace, patch: &Patch, d_embedding: &[f64], grads: &mut NetworkParams) {
        let n_in = self.dense.inputs();
        let dense_w = self.dense.weights.data();
        let mut d_pool2 = vec![0.0; n_in];
        {
            let gw = grads.dense.weights.data_mut();
            for (j, &g) in d_embedding.iter().enumerate() {
                if g == 0.0 {
                    continue;
                }
                grads.dense.bias[j] += g;
                let row = &mut gw[j * n_in..(j + 1) * n_in];
                for (dst, x) in row.iter_mut().zip(&trace.pool2) {
                    *dst += g * x;
                }
                for (dp, wv) in d_pool2.iter_mut().zip(&dense_w[j * n_in..(j + 1) * n_in]) {
                    *dp += g * wv;
                }
            }
        }

        let (h, w) = (trace.rows, trace.cols);
        let (h1, w1) = (pooled(h), pooled(w));
        let d_z2 = unpool(&d_pool2, &trace.arg2, &trace.z2);
        let mut d_pool1 = vec![0.0; trace.pool1.len()];
        conv_backward(
            &self.conv2,
            &trace.pool1,
            &d_z2,
            h1,
            w1,
            &mut grads.conv2,
            Some(&mut d_pool1),
        );
        let d_z1 = unpool(&d_pool1, &trace.arg1, &trace.z1);
        conv_backward(&self.conv1, &patch.data, &d_z1, h, w, &mut grads.conv1, None);
    }
}

/// Embedding `G_w(patch)`.
pub fn forward(params: &NetworkParams, patch: &Patch) -> Result<Vec<f64>, NetError> {
    params.forward_trace(patch).map(|t| t.embedding)
}

/// Contrastive loss of a pair and its exact gradient with respect to every
/// shared weight (sum of both twins' contributions). `y` is 0 for similar
/// pairs and 1 for dissimilar ones.
pub fn backward(
    params: &NetworkParams,
    a: &Patch,
    b: &Patch,
    y: f64,
    margin: f64,
) -> Result<(f64, NetworkParams), NetError> {
    let mut grads = params.zeros_like();
    let loss = accumulate_pair_gradient(params, a, b, y, margin, &mut grads)?;
    Ok((loss, grads))
}

pub(crate) fn accumulate_pair_gradient(
    params: &NetworkParams,
    a: &Patch,
    b: &Patch,
    y: f64,
    margin: f64,
    grads: &mut NetworkParams,
) -> Result<f64, NetError> {
    let ta = params.forward_trace(a)?;
    let tb = params.forward_trace(b)?;
    let d = euclidean(&ta.embedding, &tb.embedding)?;
    let loss = contrastive_loss(d, y, margin);
    let dl_dd = contrastive_loss_grad(d, y, margin);
    if dl_dd == 0.0 || d == 0.0 {
        // flat region, or the zero-distance kink of the norm
        return Ok(loss);
    }
    let scale = dl_dd / d;
    let d_a: Vec<f64> = ta
        .embedding
        .iter()
        .zip(&tb.embedding)
        .map(|(x, z)| scale * (x - z))
        .collect();
    let d_b: Vec<f64> = d_a.iter().map(|g| -g).collect();
    params.backward_trace(&ta, a, &d_a, grads);
    params.backward_trace(&tb, b, &d_b, grads);
    Ok(loss)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn patch(rows: usize, cols: usize, seed: u64) -> Patch {
        let mut rng = Rng::new(seed);
        Patch::from_raw(
            (0..rows * cols).map(|_| rng.uniform(-1.0, 1.0)).collect(),
            rows,
            cols,
            0,
        )
    }

    #[test]
    fn zero_weights_zero_embedding() {
        let p = NetworkParams::zeros(Architecture::default(), 15, 84).unwrap();
        let e = forward(&p, &Patch::zeros(15, 84)).unwrap();
        assert_eq!(e, vec![0.0; 32]);
    }

    #[test]
    fn embedding_length_and_determinism() {
        for (rows, cols) in [(15, 84), (15, 513), (9, 12), (4, 4)] {
            let p = NetworkParams::init(Architecture::default(), rows, cols, 1).unwrap();
            let x = patch(rows, cols, 2);
            let e1 = forward(&p, &x).unwrap();
            let e2 = forward(&p, &x).unwrap();
            assert_eq!(e1.len(), 32);
            assert_eq!(e1, e2);
        }
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let p = NetworkParams::init(Architecture::default(), 15, 84, 1).unwrap();
        assert!(matches!(
            forward(&p, &patch(15, 80, 0)),
            Err(NetError::ShapeMismatch { .. })
        ));
        assert!(matches!(
            NetworkParams::zeros(Architecture::default(), 3, 84),
            Err(NetError::InputTooSmall { .. })
        ));
    }

    #[test]
    fn init_within_glorot_bounds() {
        let p = NetworkParams::init(Architecture::default(), 15, 84, 5).unwrap();
        let limit = (6.0f64 / (9.0 + 16.0 * 9.0)).sqrt();
        assert!(p.conv1.weights.data().iter().all(|w| w.abs() <= limit));
        assert!(p.conv1.weights.data().iter().any(|w| w.abs() > limit * 0.5));
        assert!(p.dense.bias.iter().all(|&b| b == 0.0));
    }

    #[test]
    fn dissimilar_pair_beyond_margin_has_zero_gradient() {
        let p = NetworkParams::init(Architecture::default(), 15, 20, 3).unwrap();
        let (a, b) = (patch(15, 20, 10), patch(15, 20, 11));
        let d = euclidean(&forward(&p, &a).unwrap(), &forward(&p, &b).unwrap()).unwrap();
        let (loss, g) = backward(&p, &a, &b, 1.0, d * 0.5).unwrap();
        assert_eq!(loss, 0.0);
        assert!(g.slices().iter().all(|s| s.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn twin_swap_gives_identical_gradient() {
        let p = NetworkParams::init(Architecture::default(), 9, 12, 4).unwrap();
        let (a, b) = (patch(9, 12, 20), patch(9, 12, 21));
        for y in [0.0, 1.0] {
            let (l1, g1) = backward(&p, &a, &b, y, 10.0).unwrap();
            let (l2, g2) = backward(&p, &b, &a, y, 10.0).unwrap();
            assert_eq!(l1, l2);
            for (s1, s2) in g1.slices().iter().zip(g2.slices()) {
                for (x, z) in s1.iter().zip(s2) {
                    assert!((x - z).abs() <= 1e-12 * (1.0 + x.abs()));
                }
            }
        }
    }

    #[test]
    fn flat_indexing_round_trips() {
        let mut p = NetworkParams::init(Architecture::default(), 9, 12, 4).unwrap();
        let n = p.len();
        p.set_flat(n - 1, 42.0);
        assert_eq!(p.dense.bias[31], 42.0);
        assert_eq!(p.get_flat(0), p.conv1.weights.data()[0]);
    }
}
