//! Layer helpers built on the tape: linear maps, two-layer FFNs, LSTM
//! sequence runners (single and batched), and same-padded 1-D convolution.

use ndarray::Array2;
use rand_chacha::ChaCha8Rng;

use crate::init;
use crate::params::{ParamId, ParamStore};
use crate::tape::{NodeId, Tape};
use crate::Result;

/// Linear layer parameter pair.
#[derive(Debug, Clone, Copy)]
pub struct Linear {
    pub w: ParamId,
    pub b: ParamId,
}

impl Linear {
    pub fn new(
        store: &mut ParamStore,
        rng: &mut ChaCha8Rng,
        name: &str,
        rows: usize,
        cols: usize,
    ) -> Linear {
        Linear {
            w: store.add(format!("{name}.w"), init::xavier(rng, rows, cols)),
            b: store.add(format!("{name}.b"), init::zeros(1, cols)),
        }
    }

    pub fn attach(store: &ParamStore, name: &str) -> Linear {
        Linear {
            w: store.id(&format!("{name}.w")).expect("linear weights"),
            b: store.id(&format!("{name}.b")).expect("linear bias"),
        }
    }

    pub fn apply(&self, tape: &mut Tape<'_>, x: NodeId) -> Result<NodeId> {
        let w = tape.param(self.w);
        let b = tape.param(self.b);
        let y = tape.matmul(x, w)?;
        tape.add_row(y, b)
    }
}

/// Two-layer feed-forward network with ReLU between the layers.
#[derive(Debug, Clone, Copy)]
pub struct Ffn2 {
    pub l1: Linear,
    pub l2: Linear,
}

impl Ffn2 {
    pub fn new(
        store: &mut ParamStore,
        rng: &mut ChaCha8Rng,
        name: &str,
        input: usize,
        hidden: usize,
        output: usize,
    ) -> Ffn2 {
        Ffn2 {
            l1: Linear::new(store, rng, &format!("{name}.l1"), input, hidden),
            l2: Linear::new(store, rng, &format!("{name}.l2"), hidden, output),
        }
    }

    pub fn attach(store: &ParamStore, name: &str) -> Ffn2 {
        Ffn2 {
            l1: Linear::attach(store, &format!("{name}.l1")),
            l2: Linear::attach(store, &format!("{name}.l2")),
        }
    }

    pub fn apply(&self, tape: &mut Tape<'_>, x: NodeId) -> Result<NodeId> {
        let h = self.l1.apply(tape, x)?;
        let h = tape.relu(h);
        self.l2.apply(tape, h)
    }
}

/// One direction of an LSTM layer: input projection, recurrent weights,
/// gate bias. Gate layout [i, f, g, o].
#[derive(Debug, Clone, Copy)]
pub struct LstmCell {
    pub w_x: ParamId,
    pub w_h: ParamId,
    pub b: ParamId,
    pub input: usize,
    pub hidden: usize,
}

impl LstmCell {
    pub fn new(
        store: &mut ParamStore,
        rng: &mut ChaCha8Rng,
        name: &str,
        input: usize,
        hidden: usize,
    ) -> LstmCell {
        LstmCell {
            w_x: store.add(format!("{name}.w_x"), init::xavier(rng, input, 4 * hidden)),
            w_h: store.add(format!("{name}.w_h"), init::xavier(rng, hidden, 4 * hidden)),
            b: store.add(format!("{name}.b"), init::zeros(1, 4 * hidden)),
            input,
            hidden,
        }
    }

    pub fn attach(store: &ParamStore, name: &str, input: usize, hidden: usize) -> LstmCell {
        LstmCell {
            w_x: store.id(&format!("{name}.w_x")).expect("lstm w_x"),
            w_h: store.id(&format!("{name}.w_h")).expect("lstm w_h"),
            b: store.id(&format!("{name}.b")).expect("lstm bias"),
            input,
            hidden,
        }
    }

    /// Run over a single sequence (T x input) and return h outputs (T x hidden).
    pub fn run(&self, tape: &mut Tape<'_>, x: NodeId, reverse: bool) -> Result<NodeId> {
        let t_len = tape.value(x).nrows();
        if t_len == 0 {
            return Ok(tape.leaf(Array2::zeros((0, self.hidden))));
        }
        let w_x = tape.param(self.w_x);
        let xproj = tape.matmul(x, w_x)?;
        let mut h = tape.leaf(Array2::zeros((1, self.hidden)));
        let mut c = tape.leaf(Array2::zeros((1, self.hidden)));
        let mut outputs = vec![0usize; t_len];
        let order: Vec<usize> = if reverse {
            (0..t_len).rev().collect()
        } else {
            (0..t_len).collect()
        };
        for t in order {
            let xp_t = tape.gather_rows(xproj, vec![t])?;
            let (h_new, c_new) = tape.lstm_step(xp_t, h, c, self.w_h, self.b)?;
            h = h_new;
            c = c_new;
            outputs[t] = h_new;
        }
        tape.concat_rows(&outputs)
    }

    /// Lockstep run over a padded batch laid out as (batch*t_len) rows with
    /// row index b*t_len + t. Output has the same layout.
    pub fn run_batched(
        &self,
        tape: &mut Tape<'_>,
        x: NodeId,
        batch: usize,
        t_len: usize,
        reverse: bool,
    ) -> Result<NodeId> {
        let w_x = tape.param(self.w_x);
        let xproj = tape.matmul(x, w_x)?;
        let mut h = tape.leaf(Array2::zeros((batch, self.hidden)));
        let mut c = tape.leaf(Array2::zeros((batch, self.hidden)));
        let mut outputs = vec![0usize; t_len];
        let order: Vec<usize> = if reverse {
            (0..t_len).rev().collect()
        } else {
            (0..t_len).collect()
        };
        for t in order {
            let rows: Vec<usize> = (0..batch).map(|b| b * t_len + t).collect();
            let xp_t = tape.gather_rows(xproj, rows)?;
            let (h_new, c_new) = tape.lstm_step(xp_t, h, c, self.w_h, self.b)?;
            h = h_new;
            c = c_new;
            outputs[t] = h_new;
        }
        // outputs[t] is (batch x hidden); restitch to b-major rows.
        let stacked = tape.concat_rows(&outputs)?; // row = t*batch + b
        let perm: Vec<usize> = (0..batch * t_len)
            .map(|row| {
                let (b, t) = (row / t_len, row % t_len);
                t * batch + b
            })
            .collect();
        tape.gather_rows(stacked, perm)
    }
}

/// Bidirectional LSTM: forward and backward cells, outputs concatenated.
#[derive(Debug, Clone, Copy)]
pub struct BiLstm {
    pub fwd: LstmCell,
    pub bwd: LstmCell,
}

impl BiLstm {
    pub fn new(
        store: &mut ParamStore,
        rng: &mut ChaCha8Rng,
        name: &str,
        input: usize,
        hidden: usize,
    ) -> BiLstm {
        BiLstm {
            fwd: LstmCell::new(store, rng, &format!("{name}.fwd"), input, hidden),
            bwd: LstmCell::new(store, rng, &format!("{name}.bwd"), input, hidden),
        }
    }

    pub fn attach(store: &ParamStore, name: &str, input: usize, hidden: usize) -> BiLstm {
        BiLstm {
            fwd: LstmCell::attach(store, &format!("{name}.fwd"), input, hidden),
            bwd: LstmCell::attach(store, &format!("{name}.bwd"), input, hidden),
        }
    }

    pub fn run(&self, tape: &mut Tape<'_>, x: NodeId) -> Result<NodeId> {
        let f = self.fwd.run(tape, x, false)?;
        let b = self.bwd.run(tape, x, true)?;
        tape.concat_cols(f, b)
    }

    pub fn run_batched(
        &self,
        tape: &mut Tape<'_>,
        x: NodeId,
        batch: usize,
        t_len: usize,
    ) -> Result<NodeId> {
        let f = self.fwd.run_batched(tape, x, batch, t_len, false)?;
        let b = self.bwd.run_batched(tape, x, batch, t_len, true)?;
        tape.concat_cols(f, b)
    }
}

/// Same-padded 1-D convolution over a (T x C) sequence. Kernel size is
/// `kernel` (odd); weights are ((kernel*C) x out), windows taken along rows
/// with zero padding at the edges.
#[derive(Debug, Clone, Copy)]
pub struct Conv1d {
    pub w: ParamId,
    pub b: ParamId,
    pub kernel: usize,
    pub channels_in: usize,
    pub channels_out: usize,
}

impl Conv1d {
    pub fn new(
        store: &mut ParamStore,
        rng: &mut ChaCha8Rng,
        name: &str,
        kernel: usize,
        channels_in: usize,
        channels_out: usize,
    ) -> Conv1d {
        assert!(kernel % 2 == 1, "same padding needs an odd kernel");
        Conv1d {
            w: store.add(
                format!("{name}.w"),
                init::xavier(rng, kernel * channels_in, channels_out),
            ),
            b: store.add(format!("{name}.b"), init::zeros(1, channels_out)),
            kernel,
            channels_in,
            channels_out,
        }
    }

    pub fn attach(
        store: &ParamStore,
        name: &str,
        kernel: usize,
        channels_in: usize,
        channels_out: usize,
    ) -> Conv1d {
        Conv1d {
            w: store.id(&format!("{name}.w")).expect("conv weights"),
            b: store.id(&format!("{name}.b")).expect("conv bias"),
            kernel,
            channels_in,
            channels_out,
        }
    }

    pub fn apply(&self, tape: &mut Tape<'_>, x: NodeId) -> Result<NodeId> {
        let t_len = tape.value(x).nrows();
        if t_len == 0 {
            return Ok(tape.leaf(Array2::zeros((0, self.channels_out))));
        }
        // A zero row appended to the input stands in for out-of-range taps.
        let zero = tape.leaf(Array2::zeros((1, self.channels_in)));
        let padded = tape.concat_rows(&[x, zero])?;
        let half = self.kernel / 2;
        let mut taps = Vec::with_capacity(self.kernel);
        for k in 0..self.kernel {
            let rows: Vec<usize> = (0..t_len)
                .map(|t| {
                    let pos = t as isize + k as isize - half as isize;
                    if pos < 0 || pos >= t_len as isize {
                        t_len // the zero row
                    } else {
                        pos as usize
                    }
                })
                .collect();
            taps.push(tape.gather_rows(padded, rows)?);
        }
        let mut windows = taps[0];
        for &tap in &taps[1..] {
            windows = tape.concat_cols(windows, tap)?;
        }
        let w = tape.param(self.w);
        let b = tape.param(self.b);
        let y = tape.matmul(windows, w)?;
        tape.add_row(y, b)
    }
}
