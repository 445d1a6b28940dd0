//! Swap networks on the qubit ladder: qubit `p` sits next to resonator `p`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::models::{CouplingKind, PairKind};

/// A routable model interaction on logical sites.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Interaction {
    Pair { i: usize, j: usize, kind: PairKind, value: C64 },
    Coupling { sites: Vec<usize>, mode: usize, amplitude: C64, kind: CouplingKind },
}

impl Interaction {
    pub fn is_quadratic(&self) -> bool {
        matches!(self, Interaction::Coupling { kind, .. } if kind.is_quadratic())
    }

    /// Whether the operands are adjacent given `pos[logical] = physical`.
    pub fn ready(&self, pos: &[usize]) -> bool {
        let adj = |a: usize, b: usize| pos[a].abs_diff(pos[b]) == 1;
        match self {
            Interaction::Pair { i, j, .. } => adj(*i, *j),
            Interaction::Coupling { sites, mode, .. } => {
                if sites.len() == 1 {
                    pos[sites[0]] == *mode
                } else {
                    adj(sites[0], sites[1]) && (pos[sites[0]] == *mode || pos[sites[1]] == *mode)
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LayerKind {
    /// Swaps of neighbouring qubits.
    Single,
    /// Exchanges of neighbouring blocks where at least one block is a qubit pair.
    Pair,
}

/// Exchange of the blocks `[start, start + left)` and `[start + left, start + left + right)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockExchange {
    pub start: usize,
    pub left: usize,
    pub right: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwapLayer {
    pub kind: LayerKind,
    pub exchanges: Vec<BlockExchange>,
}

impl SwapLayer {
    fn singles(at: Vec<usize>) -> Self {
        Self {
            kind: LayerKind::Single,
            exchanges: at.into_iter().map(|start| BlockExchange { start, left: 1, right: 1 }).collect(),
        }
    }

    /// Elementary swaps `(p, p+1)` in time order; a block exchange costs
    /// `left * right` swaps, so a pair swap uses four.
    pub fn elementary(&self) -> Vec<(usize, usize)> {
        let mut v = Vec::new();
        for e in &self.exchanges {
            for r in 0..e.right {
                let mut p = e.start + e.left + r;
                for _ in 0..e.left {
                    v.push((p - 1, p));
                    p -= 1;
                }
            }
        }
        v
    }
}

/// Routing schedule. Slot `s` fires after `s` layers; `permutations[s][logical]` is
/// the physical qubit of a logical site at slot `s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwapSchedule {
    pub n_qubits: usize,
    pub layers: Vec<SwapLayer>,
    pub slots: Vec<Vec<usize>>,
    pub permutations: Vec<Vec<usize>>,
}

impl SwapSchedule {
    pub fn final_permutation(&self) -> &[usize] {
        self.permutations.last().expect("at least one slot")
    }

    pub fn n_swaps(&self) -> usize {
        self.layers.iter().map(|l| l.elementary().len()).sum()
    }
}

struct Builder<'a> {
    terms: &'a [Interaction],
    at: Vec<usize>,
    fired: Vec<bool>,
    layers: Vec<SwapLayer>,
    slots: Vec<Vec<usize>>,
    permutations: Vec<Vec<usize>>,
    max_layers: usize,
}

impl<'a> Builder<'a> {
    fn new(n: usize, terms: &'a [Interaction], max_layers: usize) -> Self {
        let mut b = Self {
            terms,
            at: (0..n).collect(),
            fired: vec![false; terms.len()],
            layers: vec![],
            slots: vec![],
            permutations: vec![],
            max_layers,
        };
        b.fire();
        b
    }

    fn pos(&self) -> Vec<usize> {
        let mut p = vec![0; self.at.len()];
        for (phys, &l) in self.at.iter().enumerate() {
            p[l] = phys;
        }
        p
    }

    fn fire(&mut self) {
        let pos = self.pos();
        let mut slot = Vec::new();
        for (t, term) in self.terms.iter().enumerate() {
            if !self.fired[t] && term.ready(&pos) {
                self.fired[t] = true;
                slot.push(t);
            }
        }
        self.slots.push(slot);
        self.permutations.push(pos);
    }

    fn done(&self) -> bool {
        self.fired.iter().all(|&f| f)
    }

    fn quadratic_pending(&self) -> bool {
        self.terms.iter().zip(&self.fired).any(|(t, f)| !f && t.is_quadratic())
    }

    fn push(&mut self, layer: SwapLayer) -> Result<()> {
        if self.layers.len() >= self.max_layers {
            return Err(Error::InvalidArgument(format!(
                "swap network did not cover all interactions within {} layers",
                self.max_layers
            )));
        }
        for (a, b) in layer.elementary() {
            self.at.swap(a, b);
        }
        self.layers.push(layer);
        self.fire();
        Ok(())
    }

    /// Even or odd layer of neighbouring single-qubit swaps.
    fn single_layer(&self, parity: usize) -> Vec<usize> {
        (parity..self.at.len().saturating_sub(1)).step_by(2).collect()
    }

    fn finish(self) -> SwapSchedule {
        SwapSchedule { n_qubits: self.at.len(), layers: self.layers, slots: self.slots, permutations: self.permutations }
    }
}

fn check_sites(n_qubits: usize, terms: &[Interaction]) -> Result<()> {
    for t in terms {
        let (sites, mode) = match t {
            Interaction::Pair { i, j, .. } => (vec![*i, *j], None),
            Interaction::Coupling { sites, mode, .. } => (sites.clone(), Some(*mode)),
        };
        if sites.iter().any(|&s| s >= n_qubits) || mode.is_some_and(|m| m >= n_qubits) {
            return Err(Error::InvalidArgument(format!("interaction {t:?} does not fit on {n_qubits} qubits")));
        }
    }
    Ok(())
}

/// Alternating even/odd swap layers until every interaction has fired once.
pub fn linear_swap_network(n_qubits: usize, terms: &[Interaction]) -> Result<SwapSchedule> {
    if let Some(t) = terms.iter().find(|t| t.is_quadratic()) {
        return Err(Error::UnsupportedTerm(format!(
            "{t:?} is quadratic; use the quadratic swap network"
        )));
    }
    check_sites(n_qubits, terms)?;
    let mut b = Builder::new(n_qubits, terms, 2 * n_qubits + 2);
    let mut parity = 0;
    while !b.done() {
        let mut at = b.single_layer(parity);
        if at.is_empty() {
            parity ^= 1;
            at = b.single_layer(parity);
            if at.is_empty() {
                return Err(Error::InvalidArgument("interactions need routing but there is one qubit".into()));
            }
        }
        b.push(SwapLayer::singles(at))?;
        parity ^= 1;
    }
    Ok(b.finish())
}

/// Odd-even transposition over blocks of sizes `sizes` (pairs with singletons at
/// the ends), stopping early once no quadratic interaction is pending.
fn block_network(b: &mut Builder, mut sizes: Vec<usize>) -> Result<()> {
    let n_blocks = sizes.len();
    if !sizes.contains(&2) || n_blocks < 2 {
        return Ok(());
    }
    for l in 0..2 * n_blocks {
        if !b.quadratic_pending() {
            return Ok(());
        }
        let mut exchanges = Vec::new();
        let mut start: usize = sizes[..l % 2].iter().sum();
        let mut i = l % 2;
        while i + 1 < n_blocks {
            exchanges.push(BlockExchange { start, left: sizes[i], right: sizes[i + 1] });
            start += sizes[i] + sizes[i + 1];
            sizes.swap(i, i + 1);
            i += 2;
        }
        if !exchanges.is_empty() {
            b.push(SwapLayer { kind: LayerKind::Pair, exchanges })?;
        }
    }
    Ok(())
}

fn pair_blocks(n: usize, offset: usize) -> Vec<usize> {
    let mut sizes = vec![1; offset];
    let mut left = n - offset;
    while left >= 2 {
        sizes.push(2);
        left -= 2;
    }
    sizes.extend(std::iter::repeat_n(1, left));
    sizes
}

/// External even/odd swap network with nested even-pair and odd-pair networks run at
/// the start and after every odd external layer.
pub fn quadratic_swap_network(n_qubits: usize, terms: &[Interaction]) -> Result<SwapSchedule> {
    check_sites(n_qubits, terms)?;
    let n = n_qubits;
    let mut b = Builder::new(n, terms, 8 * n * n + 8 * n + 8);
    let nested = |b: &mut Builder| -> Result<()> {
        block_network(b, pair_blocks(n, 0))?;
        block_network(b, pair_blocks(n, 1))
    };
    nested(&mut b)?;
    let mut layer = 0;
    while !b.done() {
        if layer >= 2 * n + 2 {
            return Err(Error::InvalidArgument("quadratic swap network failed to cover all interactions".into()));
        }
        let at = b.single_layer(layer % 2);
        if !at.is_empty() {
            b.push(SwapLayer::singles(at))?;
        }
        if layer % 2 == 1 {
            nested(&mut b)?;
        }
        layer += 1;
    }
    Ok(b.finish())
}
