//! Batched layer kernels over flat row-major buffers.
//!
//! Activations are laid out `(batch, channels, height, width)`; dense
//! weights `(out, in)`; conv weights `(out_ch, in_ch, kh, kw)`.

#[derive(Debug, Clone, Copy)]
pub(crate) struct ConvGeom {
    pub in_ch: usize,
    pub out_ch: usize,
    pub in_h: usize,
    pub in_w: usize,
    pub out_h: usize,
    pub out_w: usize,
    pub kh: usize,
    pub kw: usize,
    pub stride: usize,
    pub pad: usize,
}

impl ConvGeom {
    fn in_len(&self) -> usize {
        self.in_ch * self.in_h * self.in_w
    }

    fn out_len(&self) -> usize {
        self.out_ch * self.out_h * self.out_w
    }

    /// Input coordinate for output position `o` and kernel offset `k`,
    /// `None` when it falls in the zero padding.
    #[inline]
    fn source(&self, o: usize, k: usize, limit: usize) -> Option<usize> {
        let pos = (o * self.stride + k) as isize - self.pad as isize;
        (pos >= 0 && (pos as usize) < limit).then_some(pos as usize)
    }
}

pub(crate) fn dense_forward(
    x: &[f64],
    w: &[f64],
    b: &[f64],
    n: usize,
    in_f: usize,
    out_f: usize,
) -> Vec<f64> {
    let mut y = vec![0.0; n * out_f];
    for s in 0..n {
        let xs = &x[s * in_f..(s + 1) * in_f];
        let ys = &mut y[s * out_f..(s + 1) * out_f];
        for (o, yo) in ys.iter_mut().enumerate() {
            let row = &w[o * in_f..(o + 1) * in_f];
            *yo = b[o] + row.iter().zip(xs).map(|(a, c)| a * c).sum::<f64>();
        }
    }
    y
}

/// Accumulates into `dw`, `db`; returns the input gradient.
#[allow(clippy::too_many_arguments)]
pub(crate) fn dense_backward(
    x: &[f64],
    w: &[f64],
    dy: &[f64],
    dw: &mut [f64],
    db: &mut [f64],
    n: usize,
    in_f: usize,
    out_f: usize,
) -> Vec<f64> {
    let mut dx = vec![0.0; n * in_f];
    for s in 0..n {
        let xs = &x[s * in_f..(s + 1) * in_f];
        let dys = &dy[s * out_f..(s + 1) * out_f];
        let dxs = &mut dx[s * in_f..(s + 1) * in_f];
        for (o, &g) in dys.iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            db[o] += g;
            let row = &w[o * in_f..(o + 1) * in_f];
            let drow = &mut dw[o * in_f..(o + 1) * in_f];
            for i in 0..in_f {
                drow[i] += g * xs[i];
                dxs[i] += g * row[i];
            }
        }
    }
    dx
}

pub(crate) fn conv_forward(x: &[f64], w: &[f64], b: &[f64], n: usize, g: &ConvGeom) -> Vec<f64> {
    let (in_len, out_len) = (g.in_len(), g.out_len());
    let mut y = vec![0.0; n * out_len];
    for s in 0..n {
        let xs = &x[s * in_len..(s + 1) * in_len];
        let ys = &mut y[s * out_len..(s + 1) * out_len];
        for o in 0..g.out_ch {
            let plane = &mut ys[o * g.out_h * g.out_w..(o + 1) * g.out_h * g.out_w];
            plane.fill(b[o]);
            for c in 0..g.in_ch {
                let xc = &xs[c * g.in_h * g.in_w..(c + 1) * g.in_h * g.in_w];
                let wk = &w[(o * g.in_ch + c) * g.kh * g.kw..(o * g.in_ch + c + 1) * g.kh * g.kw];
                for oy in 0..g.out_h {
                    for ky in 0..g.kh {
                        let Some(iy) = g.source(oy, ky, g.in_h) else { continue };
                        let xrow = &xc[iy * g.in_w..(iy + 1) * g.in_w];
                        let prow = &mut plane[oy * g.out_w..(oy + 1) * g.out_w];
                        for kx in 0..g.kw {
                            let wv = wk[ky * g.kw + kx];
                            for (ox, p) in prow.iter_mut().enumerate() {
                                if let Some(ix) = g.source(ox, kx, g.in_w) {
                                    *p += wv * xrow[ix];
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    y
}

pub(crate) fn conv_backward(
    x: &[f64],
    w: &[f64],
    dy: &[f64],
    dw: &mut [f64],
    db: &mut [f64],
    n: usize,
    g: &ConvGeom,
) -> Vec<f64> {
    let (in_len, out_len) = (g.in_len(), g.out_len());
    let mut dx = vec![0.0; n * in_len];
    for s in 0..n {
        let xs = &x[s * in_len..(s + 1) * in_len];
        let dys = &dy[s * out_len..(s + 1) * out_len];
        let dxs = &mut dx[s * in_len..(s + 1) * in_len];
        for o in 0..g.out_ch {
            let dplane = &dys[o * g.out_h * g.out_w..(o + 1) * g.out_h * g.out_w];
            db[o] += dplane.iter().sum::<f64>();
            for c in 0..g.in_ch {
                let base = (o * g.in_ch + c) * g.kh * g.kw;
                let xc = &xs[c * g.in_h * g.in_w..(c + 1) * g.in_h * g.in_w];
                let dxc = &mut dxs[c * g.in_h * g.in_w..(c + 1) * g.in_h * g.in_w];
                for oy in 0..g.out_h {
                    for ky in 0..g.kh {
                        let Some(iy) = g.source(oy, ky, g.in_h) else { continue };
                        for kx in 0..g.kw {
                            let wv = w[base + ky * g.kw + kx];
                            let mut acc = 0.0;
                            for ox in 0..g.out_w {
                                if let Some(ix) = g.source(ox, kx, g.in_w) {
                                    let d = dplane[oy * g.out_w + ox];
                                    acc += d * xc[iy * g.in_w + ix];
                                    dxc[iy * g.in_w + ix] += d * wv;
                                }
                            }
                            dw[base + ky * g.kw + kx] += acc;
                        }
                    }
                }
            }
        }
    }
    dx
}

pub(crate) fn relu_forward(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&v| if v > 0.0 { v } else { 0.0 }).collect()
}

pub(crate) fn relu_backward(x: &[f64], dy: &[f64]) -> Vec<f64> {
    x.iter()
        .zip(dy)
        .map(|(&v, &d)| if v > 0.0 { d } else { 0.0 })
        .collect()
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct PoolGeom {
    pub ch: usize,
    pub in_h: usize,
    pub in_w: usize,
    pub out_h: usize,
    pub out_w: usize,
    pub k: usize,
    pub stride: usize,
}

/// Returns the pooled output and, per output element, the index of the
/// winning input element within its sample. Ties go to the first maximum.
pub(crate) fn pool_forward(x: &[f64], n: usize, g: &PoolGeom) -> (Vec<f64>, Vec<usize>) {
    let in_len = g.ch * g.in_h * g.in_w;
    let out_len = g.ch * g.out_h * g.out_w;
    let mut y = vec![0.0; n * out_len];
    let mut arg = vec![0usize; n * out_len];
    for s in 0..n {
        let xs = &x[s * in_len..(s + 1) * in_len];
        for c in 0..g.ch {
            for oy in 0..g.out_h {
                for ox in 0..g.out_w {
                    let mut best = f64::NEG_INFINITY;
                    let mut best_idx = 0;
                    for ky in 0..g.k {
                        for kx in 0..g.k {
                            let idx = c * g.in_h * g.in_w
                                + (oy * g.stride + ky) * g.in_w
                                + ox * g.stride
                                + kx;
                            if xs[idx] > best {
                                best = xs[idx];
                                best_idx = idx;
                            }
                        }
                    }
                    let o = s * out_len + c * g.out_h * g.out_w + oy * g.out_w + ox;
                    y[o] = best;
                    arg[o] = best_idx;
                }
            }
        }
    }
    (y, arg)
}

pub(crate) fn pool_backward(dy: &[f64], arg: &[usize], n: usize, g: &PoolGeom) -> Vec<f64> {
    let in_len = g.ch * g.in_h * g.in_w;
    let out_len = g.ch * g.out_h * g.out_w;
    let mut dx = vec![0.0; n * in_len];
    for s in 0..n {
        for o in 0..out_len {
            dx[s * in_len + arg[s * out_len + o]] += dy[s * out_len + o];
        }
    }
    dx
}
