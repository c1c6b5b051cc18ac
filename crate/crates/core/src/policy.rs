//! Fixed-topology dual-input convolutional policy.
//!
//! ```text
//! tiles [C x H x W] -> conv 3x3 (8 filters, same padding) -> relu -> flatten (8·H·W)
//!                                                                     |
//! orientation [4] ------------------------------------------------> concat
//!                                                                     |
//!                                        dense 64 -> relu -> dense |actions|
//! ```
//!
//! The flat parameter vector is laid out as
//!
//! | block    | shape                          | index                          |
//! |----------|--------------------------------|--------------------------------|
//! | conv w   | `[8][C][3][3]`                 | `((f*C + c)*3 + ky)*3 + kx`    |
//! | conv b   | `[8]`                          |                                |
//! | dense1 w | `[8·H·W + 4][64]` (input-major)| feature `f*H*W + y*W + x`, then the 4 orientation slots |
//! | dense1 b | `[64]`                         |                                |
//! | dense2 w | `[64][A]` (hidden-major)       |                                |
//! | dense2 b | `[A]`                          |                                |

use std::io::{self, Read, Write};

use serde::{Deserialize, Serialize};

use crate::game::{Action, Agent, GameState, GameVariant};
use crate::observation::{channel_count, encode_into, moving_channels, ObsTensor, OrientVec};

pub const FILTERS: usize = 8;
pub const KERNEL: usize = 3;
pub const HIDDEN: usize = 64;
pub const ORIENT: usize = 4;

const MAGIC: [u8; 4] = *b"PVEC";

#[derive(Debug, thiserror::Error)]
pub enum PolicyError {
    #[error("invalid policy spec: {0}")]
    InvalidSpec(&'static str),
    #[error("parameter vector has {found} values, spec needs {expected}")]
    ParamSpecMismatch { expected: usize, found: usize },
    #[error("observation shape {found:?} does not match spec {expected:?}")]
    ShapeMismatch {
        expected: (usize, usize, usize),
        found: (usize, usize, usize),
    },
    #[error("not a parameter file (bad magic)")]
    BadMagic,
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PolicySpec {
    pub in_channels: usize,
    pub grid_w: usize,
    pub grid_h: usize,
    pub action_count: usize,
}

impl PolicySpec {
    pub fn new(
        in_channels: usize,
        grid_w: usize,
        grid_h: usize,
        action_count: usize,
    ) -> Result<Self, PolicyError> {
        if in_channels == 0 {
            return Err(PolicyError::InvalidSpec("no input channels"));
        }
        if grid_w == 0 || grid_h == 0 {
            return Err(PolicyError::InvalidSpec("empty grid"));
        }
        if action_count == 0 {
            return Err(PolicyError::InvalidSpec("no actions"));
        }
        Ok(PolicySpec {
            in_channels,
            grid_w,
            grid_h,
            action_count,
        })
    }

    /// Spec for a variant played on a `width x height` grid.
    pub fn for_variant(variant: GameVariant, width: usize, height: usize) -> Self {
        PolicySpec::new(channel_count(variant), width, height, variant.action_count())
            .expect("variant specs are never degenerate")
    }

    fn cells(&self) -> usize {
        self.grid_w * self.grid_h
    }

    fn features(&self) -> usize {
        FILTERS * self.cells() + ORIENT
    }

    pub fn parameter_count(&self) -> usize {
        FILTERS * (KERNEL * KERNEL * self.in_channels + 1)
            + HIDDEN * (FILTERS * self.cells() + ORIENT + 1)
            + self.action_count * (HIDDEN + 1)
    }

    fn layout(&self) -> Layout {
        let conv_w = 0;
        let conv_b = conv_w + FILTERS * self.in_channels * KERNEL * KERNEL;
        let d1_w = conv_b + FILTERS;
        let d1_b = d1_w + self.features() * HIDDEN;
        let d2_w = d1_b + HIDDEN;
        let d2_b = d2_w + HIDDEN * self.action_count;
        Layout {
            conv_w,
            conv_b,
            d1_w,
            d1_b,
            d2_w,
            d2_b,
        }
    }

    /// Offset of the final-layer bias for action `k`.
    pub fn output_bias_index(&self, k: usize) -> usize {
        self.layout().d2_b + k
    }

    /// Offset of conv weight `(filter, channel, ky, kx)`.
    pub fn conv_weight_index(&self, f: usize, c: usize, ky: usize, kx: usize) -> usize {
        ((f * self.in_channels + c) * KERNEL + ky) * KERNEL + kx
    }

    pub fn conv_bias_index(&self, f: usize) -> usize {
        self.layout().conv_b + f
    }

    /// Offset of the dense-1 weight from conv output `(f, x, y)` to hidden unit `j`.
    pub fn dense1_weight_index(&self, f: usize, x: usize, y: usize, j: usize) -> usize {
        let feature = f * self.cells() + y * self.grid_w + x;
        self.layout().d1_w + feature * HIDDEN + j
    }

    /// Offset of the dense-2 weight from hidden unit `j` to action `k`.
    pub fn dense2_weight_index(&self, j: usize, k: usize) -> usize {
        self.layout().d2_w + j * self.action_count + k
    }

    pub fn check(&self, params: &ParamVector) -> Result<(), PolicyError> {
        let expected = self.parameter_count();
        if params.len() != expected {
            return Err(PolicyError::ParamSpecMismatch {
                expected,
                found: params.len(),
            });
        }
        Ok(())
    }

    /// Action scores for one observation.
    pub fn forward(
        &self,
        params: &ParamVector,
        obs: &ObsTensor,
        orient: &OrientVec,
    ) -> Result<Vec<f32>, PolicyError> {
        self.check(params)?;
        let expected = (self.in_channels, self.grid_w, self.grid_h);
        let found = (obs.channels, obs.width, obs.height);
        if expected != found {
            return Err(PolicyError::ShapeMismatch { expected, found });
        }
        Ok(Evaluator::new(*self, params.as_slice()).scores(obs, orient).to_vec())
    }
}

#[derive(Clone, Copy)]
struct Layout {
    conv_w: usize,
    conv_b: usize,
    d1_w: usize,
    d1_b: usize,
    d2_w: usize,
    d2_b: usize,
}

/// Forward pass bound to one parameter vector.
///
/// The input is split into static channels (walls, floor, pickups) and moving
/// ones. Conv outputs and hidden pre-activations of the static part are
/// cached and rebuilt only when a static channel changes; each call then
/// patches the cached values around the moving sprites. The arithmetic is a
/// fixed function of the observation, so cached and fresh evaluators return
/// bit-identical scores.
pub struct Evaluator<'a> {
    spec: PolicySpec,
    p: &'a [f32],
    lay: Layout,
    moving: &'static [usize],
    is_moving: Vec<bool>,
    static_sig: Option<Vec<u8>>,
    conv_base: Vec<f32>,
    hidden_base: Vec<f32>,
    conv: Vec<f32>,
    touched: Vec<usize>,
    mark: Vec<bool>,
    hidden: Vec<f32>,
    scores: Vec<f32>,
}

impl<'a> Evaluator<'a> {
    /// `p` must hold exactly `spec.parameter_count()` values.
    pub fn new(spec: PolicySpec, p: &'a [f32]) -> Self {
        assert_eq!(p.len(), spec.parameter_count(), "parameter vector length");
        let moving = moving_channels(spec.in_channels);
        let mut is_moving = vec![false; spec.in_channels];
        for &c in moving {
            is_moving[c] = true;
        }
        let n = FILTERS * spec.cells();
        Evaluator {
            spec,
            p,
            lay: spec.layout(),
            moving,
            is_moving,
            static_sig: None,
            conv_base: vec![0.0; n],
            hidden_base: vec![0.0; HIDDEN],
            conv: vec![0.0; n],
            touched: Vec::new(),
            mark: vec![false; spec.cells()],
            hidden: vec![0.0; HIDDEN],
            scores: vec![0.0; spec.action_count],
        }
    }

    fn kernel(&self, f: usize, c: usize) -> &'a [f32] {
        &self.p[self.lay.conv_w + (f * self.spec.in_channels + c) * KERNEL * KERNEL..][..KERNEL * KERNEL]
    }

    /// Output positions reached by a hot input cell, with the kernel tap
    /// that connects them.
    fn reach(&self, i: usize) -> impl Iterator<Item = (usize, usize)> {
        let (w, h) = (self.spec.grid_w, self.spec.grid_h);
        let (x, y) = (i % w, i / w);
        (0..KERNEL).flat_map(move |ky| {
            (0..KERNEL).filter_map(move |kx| {
                let oy = (y + 1).checked_sub(ky).filter(|&oy| oy < h)?;
                let ox = (x + 1).checked_sub(kx).filter(|&ox| ox < w)?;
                Some((oy * w + ox, ky * KERNEL + kx))
            })
        })
    }

    fn static_signature(&self, obs: &ObsTensor) -> Vec<u8> {
        (0..self.spec.in_channels)
            .filter(|&c| !self.is_moving[c])
            .flat_map(|c| obs.channel(c).iter().copied())
            .collect()
    }

    fn rebuild_static(&mut self, obs: &ObsTensor) {
        let cells = self.spec.cells();
        for f in 0..FILTERS {
            self.conv_base[f * cells..(f + 1) * cells].fill(self.p[self.lay.conv_b + f]);
        }
        for c in (0..self.spec.in_channels).filter(|&c| !self.is_moving[c]) {
            for (i, _) in obs.channel(c).iter().enumerate().filter(|(_, &v)| v != 0) {
                for f in 0..FILTERS {
                    let wk = self.kernel(f, c);
                    for (o, t) in self.reach(i) {
                        self.conv_base[f * cells + o] += wk[t];
                    }
                }
            }
        }
        self.hidden_base
            .copy_from_slice(&self.p[self.lay.d1_b..self.lay.d1_b + HIDDEN]);
        let d1 = &self.p[self.lay.d1_w..self.lay.d1_b];
        for (j, &v) in self.conv_base.iter().enumerate() {
            if v > 0.0 {
                for (hv, &wv) in self.hidden_base.iter_mut().zip(&d1[j * HIDDEN..(j + 1) * HIDDEN]) {
                    *hv += v * wv;
                }
            }
        }
        self.conv.copy_from_slice(&self.conv_base);
    }

    /// Action scores; `obs` and `orient` must match the spec's shape.
    pub fn scores(&mut self, obs: &ObsTensor, orient: &OrientVec) -> &[f32] {
        let sig = self.static_signature(obs);
        if self.static_sig.as_ref() != Some(&sig) {
            self.rebuild_static(obs);
            self.static_sig = Some(sig);
        }
        let cells = self.spec.cells();

        // Patch conv outputs around moving sprites.
        for &c in self.moving {
            for (i, _) in obs.channel(c).iter().enumerate().filter(|(_, &v)| v != 0) {
                for (o, t) in self.reach(i) {
                    if !self.mark[o] {
                        self.mark[o] = true;
                        self.touched.push(o);
                    }
                    for f in 0..FILTERS {
                        self.conv[f * cells + o] += self.kernel(f, c)[t];
                    }
                }
            }
        }

        self.hidden.copy_from_slice(&self.hidden_base);
        let d1 = &self.p[self.lay.d1_w..self.lay.d1_b];
        for &o in &self.touched {
            for f in 0..FILTERS {
                let j = f * cells + o;
                let delta = self.conv[j].max(0.0) - self.conv_base[j].max(0.0);
                if delta != 0.0 {
                    for (hv, &wv) in self.hidden.iter_mut().zip(&d1[j * HIDDEN..(j + 1) * HIDDEN]) {
                        *hv += delta * wv;
                    }
                }
                self.conv[j] = self.conv_base[j];
            }
            self.mark[o] = false;
        }
        self.touched.clear();
        for (k, &bit) in orient.0.iter().enumerate() {
            if bit != 0 {
                let row = &d1[(FILTERS * cells + k) * HIDDEN..][..HIDDEN];
                for (hv, &wv) in self.hidden.iter_mut().zip(row) {
                    *hv += wv;
                }
            }
        }

        let a = self.spec.action_count;
        self.scores
            .copy_from_slice(&self.p[self.lay.d2_b..self.lay.d2_b + a]);
        let d2 = &self.p[self.lay.d2_w..self.lay.d2_b];
        for (j, &v) in self.hidden.iter().enumerate() {
            if v > 0.0 {
                for (s, &wv) in self.scores.iter_mut().zip(&d2[j * a..(j + 1) * a]) {
                    *s += v * wv;
                }
            }
        }
        &self.scores
    }
}

/// Index of the highest score; ties go to the lowest index.
pub fn select_action(scores: &[f32]) -> usize {
    assert!(!scores.is_empty(), "select_action needs at least one score");
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

/// Flat real-valued parameters of one network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamVector(Vec<f32>);

impl ParamVector {
    pub fn zeros(spec: &PolicySpec) -> Self {
        ParamVector(vec![0.0; spec.parameter_count()])
    }

    pub fn from_vec(values: Vec<f32>) -> Self {
        ParamVector(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f32] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<f32> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// `PVEC` magic, little-endian `u32` length, then little-endian `f32`s.
    pub fn write_to<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(&MAGIC)?;
        w.write_all(&(self.0.len() as u32).to_le_bytes())?;
        let mut buf = Vec::with_capacity(self.0.len() * 4);
        for v in &self.0 {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + 4 * self.0.len());
        self.write_to(&mut out).expect("writing to a Vec cannot fail");
        out
    }

    /// Read a vector written by [`ParamVector::write_to`]. A file shorter
    /// than its header claims is reported as a length mismatch.
    pub fn read_from<R: Read>(mut r: R) -> Result<Self, PolicyError> {
        let mut header = [0u8; 8];
        r.read_exact(&mut header)?;
        if header[..4] != MAGIC {
            return Err(PolicyError::BadMagic);
        }
        let len = u32::from_le_bytes(header[4..].try_into().unwrap()) as usize;
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        if bytes.len() != len * 4 {
            return Err(PolicyError::ParamSpecMismatch {
                expected: len,
                found: bytes.len() / 4,
            });
        }
        Ok(ParamVector(
            bytes
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
                .collect(),
        ))
    }
}

/// Greedy (argmax) controller backed by a parameter vector.
pub struct PolicyAgent<'a> {
    variant: GameVariant,
    obs: ObsTensor,
    eval: Evaluator<'a>,
}

impl<'a> PolicyAgent<'a> {
    pub fn new(spec: PolicySpec, params: &'a ParamVector, variant: GameVariant) -> Result<Self, PolicyError> {
        Self::from_slice(spec, params.as_slice(), variant)
    }

    pub fn from_slice(spec: PolicySpec, params: &'a [f32], variant: GameVariant) -> Result<Self, PolicyError> {
        let expected = spec.parameter_count();
        if params.len() != expected {
            return Err(PolicyError::ParamSpecMismatch {
                expected,
                found: params.len(),
            });
        }
        if channel_count(variant) != spec.in_channels || variant.action_count() != spec.action_count {
            return Err(PolicyError::InvalidSpec("spec does not match the game variant"));
        }
        Ok(PolicyAgent {
            variant,
            obs: ObsTensor::zeros(spec.in_channels, spec.grid_w, spec.grid_h),
            eval: Evaluator::new(spec, params),
        })
    }

    pub fn scores(&mut self, state: &GameState) -> &[f32] {
        let orient = encode_into(state, &mut self.obs);
        self.eval.scores(&self.obs, &orient)
    }
}

impl Agent for PolicyAgent<'_> {
    fn act(&mut self, state: &GameState) -> Action {
        let idx = select_action(self.scores(state));
        self.variant.actions()[idx]
    }

    fn is_markov(&self) -> bool {
        true
    }
}
