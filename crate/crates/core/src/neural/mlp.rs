use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Fully connected layer; `weights` is row-major `output × input`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub input: usize,
    pub output: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    pub fn zeros(input: usize, output: usize) -> Self {
        Dense {
            input,
            output,
            weights: vec![0.0; input * output],
            bias: vec![0.0; output],
        }
    }

    /// Glorot-uniform weights in ±sqrt(6 / (fan_in + fan_out)), zero bias.
    pub fn glorot(input: usize, output: usize, rng: &mut ChaCha8Rng) -> Self {
        let limit = (6.0 / (input + output) as f64).sqrt();
        let weights = (0..input * output).map(|_| rng.random_range(-limit..limit)).collect();
        Dense {
            input,
            output,
            weights,
            bias: vec![0.0; output],
        }
    }

    fn row(&self, j: usize) -> &[f64] {
        &self.weights[j * self.input..(j + 1) * self.input]
    }
}

/// Feed-forward network with tanh hidden layers and a linear output layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub layers: Vec<Dense>,
}

/// Activations of one forward pass through [`Mlp::forward_split`].
#[derive(Debug, Clone)]
pub struct Trace {
    tail: Vec<f64>,
    /// Output of every layer (post-tanh for hidden layers).
    acts: Vec<Vec<f64>>,
}

impl Trace {
    pub fn output(&self) -> &[f64] {
        self.acts.last().expect("at least one layer")
    }
}

impl Mlp {
    /// `dims = [input, hidden.., output]`.
    pub fn glorot(dims: &[usize], rng: &mut ChaCha8Rng) -> Self {
        Mlp {
            layers: dims.windows(2).map(|w| Dense::glorot(w[0], w[1], rng)).collect(),
        }
    }

    pub fn zeros(dims: &[usize]) -> Self {
        Mlp {
            layers: dims.windows(2).map(|w| Dense::zeros(w[0], w[1])).collect(),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Mlp {
            layers: self.layers.iter().map(|l| Dense::zeros(l.input, l.output)).collect(),
        }
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut d = vec![self.layers[0].input];
        d.extend(self.layers.iter().map(|l| l.output));
        d
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// First-layer pre-activation contribution of the leading input columns,
    /// bias included: `W[:, ..p] · prefix + b`.
    pub fn first_prefix(&self, prefix: &[f64]) -> Vec<f64> {
        let l = &self.layers[0];
        (0..l.output)
            .map(|j| l.bias[j] + dot(&l.row(j)[..prefix.len()], prefix))
            .collect()
    }

    /// Forward pass where the first layer's prefix part is precomputed and
    /// `tail` fills the remaining input columns.
    pub fn forward_split(&self, prefix_pre: &[f64], tail: &[f64]) -> Trace {
        let first = &self.layers[0];
        let off = first.input - tail.len();
        let n = self.layers.len();
        let mut acts = Vec::with_capacity(n);
        let mut cur: Vec<f64> = (0..first.output)
            .map(|j| prefix_pre[j] + dot(&first.row(j)[off..], tail))
            .collect();
        if n > 1 {
            cur.iter_mut().for_each(|x| *x = x.tanh());
        }
        acts.push(cur);
        for (li, layer) in self.layers.iter().enumerate().skip(1) {
            let x = &acts[li - 1];
            let mut out: Vec<f64> = (0..layer.output).map(|j| layer.bias[j] + dot(layer.row(j), x)).collect();
            if li + 1 < n {
                out.iter_mut().for_each(|v| *v = v.tanh());
            }
            acts.push(out);
        }
        Trace { tail: tail.to_vec(), acts }
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let pre = self.first_prefix(x);
        self.forward_split(&pre, &[]).output().to_vec()
    }

    /// Backpropagates `d_out` through a trace from [`Mlp::forward_split`].
    ///
    /// Gradients of every layer after the first, and of the first layer's
    /// tail columns, are added into `grads`. Returns the first layer's
    /// pre-activation gradient (for [`Mlp::accumulate_prefix`]) and the
    /// gradient with respect to `tail`.
    pub fn backward_split(&self, trace: &Trace, d_out: &[f64], grads: &mut Mlp) -> (Vec<f64>, Vec<f64>) {
        let n = self.layers.len();
        let mut delta = d_out.to_vec();
        for li in (0..n).rev() {
            let layer = &self.layers[li];
            if li + 1 < n {
                for (d, a) in delta.iter_mut().zip(&trace.acts[li]) {
                    *d *= 1.0 - a * a;
                }
            }
            let g = &mut grads.layers[li];
            if li == 0 {
                let off = layer.input - trace.tail.len();
                let mut d_tail = vec![0.0; trace.tail.len()];
                for (j, &dj) in delta.iter().enumerate() {
                    if dj == 0.0 {
                        continue;
                    }
                    let grow = &mut g.weights[j * layer.input + off..(j + 1) * layer.input];
                    let wrow = &layer.row(j)[off..];
                    for i in 0..trace.tail.len() {
                        grow[i] += dj * trace.tail[i];
                        d_tail[i] += dj * wrow[i];
                    }
                }
                return (delta, d_tail);
            }
            let x = &trace.acts[li - 1];
            let mut d_x = vec![0.0; layer.input];
            for (j, &dj) in delta.iter().enumerate() {
                g.bias[j] += dj;
                if dj == 0.0 {
                    continue;
                }
                let grow = &mut g.weights[j * layer.input..(j + 1) * layer.input];
                let wrow = layer.row(j);
                for i in 0..layer.input {
                    grow[i] += dj * x[i];
                    d_x[i] += dj * wrow[i];
                }
            }
            delta = d_x;
        }
        unreachable!("network has at least one layer")
    }

    /// Adds the prefix-column and bias gradients of the first layer given the
    /// (summed) first-layer pre-activation gradient.
    pub fn accumulate_prefix(first_delta: &[f64], prefix: &[f64], grads: &mut Mlp) {
        let g = &mut grads.layers[0];
        for (j, &dj) in first_delta.iter().enumerate() {
            g.bias[j] += dj;
            let grow = &mut g.weights[j * g.input..j * g.input + prefix.len()];
            for (w, &x) in grow.iter_mut().zip(prefix) {
                *w += dj * x;
            }
        }
    }

    /// All parameters in layer order, weights before bias.
    pub fn flatten_into(&self, out: &mut Vec<f64>) {
        for l in &self.layers {
            out.extend_from_slice(&l.weights);
            out.extend_from_slice(&l.bias);
        }
    }

    /// Inverse of [`Mlp::flatten_into`]; returns the number of values read.
    pub fn load_flat(&mut self, values: &[f64]) -> usize {
        let mut pos = 0;
        for l in &mut self.layers {
            let nw = l.weights.len();
            l.weights.copy_from_slice(&values[pos..pos + nw]);
            pos += nw;
            let nb = l.bias.len();
            l.bias.copy_from_slice(&values[pos..pos + nb]);
            pos += nb;
        }
        pos
    }

    /// `self += scale * other`.
    pub fn add_scaled(&mut self, other: &Mlp, scale: f64) {
        for (l, o) in self.layers.iter_mut().zip(&other.layers) {
            l.weights.iter_mut().zip(&o.weights).for_each(|(a, b)| *a += scale * b);
            l.bias.iter_mut().zip(&o.bias).for_each(|(a, b)| *a += scale * b);
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Mlp {
        // 2 -> 2 (tanh) -> 1
        Mlp {
            layers: vec![
                Dense { input: 2, output: 2, weights: vec![0.5, -1.0, 0.25, 0.75], bias: vec![0.1, -0.2] },
                Dense { input: 2, output: 1, weights: vec![2.0, -1.0], bias: vec![0.3] },
            ],
        }
    }

    #[test]
    fn hand_forward() {
        let x = [1.0, 2.0];
        let h0 = (0.5 * 1.0 - 1.0 * 2.0 + 0.1f64).tanh();
        let h1 = (0.25 * 1.0 + 0.75 * 2.0 - 0.2f64).tanh();
        let y = 2.0 * h0 - h1 + 0.3;
        assert!((tiny().forward(&x)[0] - y).abs() < 1e-15);
    }

    #[test]
    fn split_matches_full() {
        let m = tiny();
        let full = m.forward(&[1.0, 2.0]);
        let pre = m.first_prefix(&[1.0]);
        let split = m.forward_split(&pre, &[2.0]);
        assert!((full[0] - split.output()[0]).abs() < 1e-15);
    }

    #[test]
    fn flatten_roundtrip() {
        let m = tiny();
        let mut v = Vec::new();
        m.flatten_into(&mut v);
        assert_eq!(v.len(), m.param_count());
        let mut z = m.zeros_like();
        assert_eq!(z.load_flat(&v), v.len());
        assert_eq!(z, m);
    }
}
