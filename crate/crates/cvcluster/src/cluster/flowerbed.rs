use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::gates::Correction;
use crate::gaussian::{
    condition_on_quadrature, sample_quadrature, GaussianState, MeasurementOutcome, Quadrature,
    SqueezedThermalSpec, SymplecticTransform,
};
use crate::{Error, Result};

/// Largest mode count a lattice may carry (64 quadratures).
pub const MODE_CAP: usize = 32;

/// Role of a lattice node. Only the two resource kinds may be deleted;
/// marked inputs and outputs are pinned.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeKind {
    /// Squeezed-thermal resource mode of the base lattice.
    ThermalBase,
    /// Lattice site reserved for a grid-encoded ancilla. The marker is
    /// bookkeeping on the graph; the underlying mode is the same
    /// squeezed-thermal resource as the rest of the lattice.
    GkpAncillaMarker,
    Input,
    Output,
}

/// One lattice site. `id` is stable for the lifetime of the graph; `mode`
/// is the current index into the Gaussian state and shifts down as earlier
/// modes are deleted.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphNode {
    pub id: usize,
    pub row: usize,
    pub col: usize,
    pub kind: NodeKind,
    pub mode: usize,
}

/// An applied CZ[weight] edge between two node ids.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

/// What a deletion did: the measured node, the q̂ outcome with its density,
/// and the outcome-proportional corrections applied to the neighbours.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeletionRecord {
    pub node: usize,
    pub outcome: MeasurementOutcome,
    pub corrections: Vec<Correction>,
}

/// A rectangular cluster lattice of squeezed-thermal modes: one mode per
/// site, CZ[1] on every nearest-neighbour pair, ancilla markers on the odd
/// checkerboard. Sites are numbered row-major; node (r, c) starts life as
/// mode r·cols + c.
///
/// Deleting a node measures its q̂ and displaces each neighbour's p̂ by
/// −weight·outcome. Because the measured q̂ commutes with every edge gate,
/// this removes the node exactly: the survivors end up in the state they
/// would have had if the node had never been attached, whatever its κ and
/// whatever the outcome.
#[derive(Clone, Debug)]
pub struct FlowerbedGraph {
    rows: usize,
    cols: usize,
    resource: SqueezedThermalSpec,
    state: GaussianState,
    nodes: Vec<GraphNode>,
    edges: Vec<GraphEdge>,
}

impl FlowerbedGraph {
    /// Builds the rows×cols lattice. The mode count rows·cols must not
    /// exceed [`MODE_CAP`].
    pub fn build(rows: usize, cols: usize, resource: SqueezedThermalSpec) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyLattice);
        }
        let n = rows * cols;
        if n > MODE_CAP {
            return Err(Error::ModeCapExceeded {
                modes: n,
                cap: MODE_CAP,
            });
        }

        let mut cov = DMatrix::zeros(2 * n, 2 * n);
        for mode in 0..n {
            cov[(mode, mode)] = resource.kappa();
            cov[(n + mode, n + mode)] = resource.epsilon();
        }
        let mut state = GaussianState::from_parts_unchecked(DVector::zeros(2 * n), cov);

        let nodes = (0..n)
            .map(|id| {
                let (row, col) = (id / cols, id % cols);
                GraphNode {
                    id,
                    row,
                    col,
                    kind: if (row + col) % 2 == 1 {
                        NodeKind::GkpAncillaMarker
                    } else {
                        NodeKind::ThermalBase
                    },
                    mode: id,
                }
            })
            .collect();

        let mut edges = Vec::new();
        for row in 0..rows {
            for col in 0..cols {
                let id = row * cols + col;
                if col + 1 < cols {
                    edges.push(GraphEdge {
                        a: id,
                        b: id + 1,
                        weight: 1.0,
                    });
                }
                if row + 1 < rows {
                    edges.push(GraphEdge {
                        a: id,
                        b: id + cols,
                        weight: 1.0,
                    });
                }
            }
        }
        for edge in &edges {
            let gate = SymplecticTransform::cz(n, edge.a, edge.b, edge.weight)?;
            state = gate.apply_to(&state)?;
        }

        Ok(Self {
            rows,
            cols,
            resource,
            state,
            nodes,
            edges,
        })
    }

    /// Builds the lattice as if site `skip` had never existed: the other
    /// sites keep their ids, modes are renumbered densely in row-major
    /// order, and no edge touches the missing site. This is the reference
    /// a deletion is checked against.
    pub fn build_without(
        rows: usize,
        cols: usize,
        resource: SqueezedThermalSpec,
        skip: usize,
    ) -> Result<Self> {
        let full = Self::build(rows, cols, resource)?;
        if skip >= rows * cols {
            return Err(Error::NodeNotFound(skip));
        }

        let nodes: Vec<GraphNode> = full
            .nodes
            .into_iter()
            .filter(|node| node.id != skip)
            .enumerate()
            .map(|(mode, node)| GraphNode { mode, ..node })
            .collect();
        let n = nodes.len();
        if n == 0 {
            return Err(Error::EmptyLattice);
        }

        let mut cov = DMatrix::zeros(2 * n, 2 * n);
        for mode in 0..n {
            cov[(mode, mode)] = resource.kappa();
            cov[(n + mode, n + mode)] = resource.epsilon();
        }
        let mut state = GaussianState::from_parts_unchecked(DVector::zeros(2 * n), cov);

        let mode_of = |id: usize| nodes.iter().find(|node| node.id == id).map(|n| n.mode);
        let edges: Vec<GraphEdge> = full
            .edges
            .into_iter()
            .filter(|edge| edge.a != skip && edge.b != skip)
            .collect();
        for edge in &edges {
            let (a, b) = (
                mode_of(edge.a).expect("edge endpoints survive"),
                mode_of(edge.b).expect("edge endpoints survive"),
            );
            let gate = SymplecticTransform::cz(n, a, b, edge.weight)?;
            state = gate.apply_to(&state)?;
        }

        Ok(Self {
            rows,
            cols,
            resource,
            state,
            nodes,
            edges,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn resource(&self) -> SqueezedThermalSpec {
        self.resource
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn state(&self) -> &GaussianState {
        &self.state
    }

    pub fn nodes(&self) -> &[GraphNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[GraphEdge] {
        &self.edges
    }

    pub fn node(&self, id: usize) -> Result<&GraphNode> {
        self.nodes
            .iter()
            .find(|n| n.id == id)
            .ok_or(Error::NodeNotFound(id))
    }

    /// Ids and edge weights of the current neighbours of `id`.
    pub fn neighbors(&self, id: usize) -> Vec<(usize, f64)> {
        self.edges
            .iter()
            .filter_map(|e| {
                if e.a == id {
                    Some((e.b, e.weight))
                } else if e.b == id {
                    Some((e.a, e.weight))
                } else {
                    None
                }
            })
            .collect()
    }

    /// Re-labels a node, e.g. to pin a site as Input before wiring it up.
    pub fn set_kind(&mut self, id: usize, kind: NodeKind) -> Result<()> {
        let node = self
            .nodes
            .iter_mut()
            .find(|n| n.id == id)
            .ok_or(Error::NodeNotFound(id))?;
        node.kind = kind;
        Ok(())
    }

    /// Entangles two live nodes with CZ[weight] and records the edge.
    pub fn add_edge(&mut self, a: usize, b: usize, weight: f64) -> Result<()> {
        if a == b {
            return Err(Error::DuplicateMode(a));
        }
        let mode_a = self.node(a)?.mode;
        let mode_b = self.node(b)?.mode;
        let gate = SymplecticTransform::cz(self.state.n_modes(), mode_a, mode_b, weight)?;
        self.state = gate.apply_to(&self.state)?;
        self.edges.push(GraphEdge { a, b, weight });
        Ok(())
    }

    /// Deletes a resource node by measuring its q̂, with the outcome drawn
    /// from the exact marginal.
    pub fn delete_node<R: rand::Rng + ?Sized>(
        &mut self,
        id: usize,
        rng: &mut R,
    ) -> Result<DeletionRecord> {
        let mode = self.deletable_mode(id)?;
        let outcome = sample_quadrature(&self.state, mode, Quadrature::Q, rng)?;
        self.delete_node_with_outcome(id, outcome)
    }

    /// Deletes a resource node given a pinned q̂ outcome.
    pub fn delete_node_with_outcome(&mut self, id: usize, outcome: f64) -> Result<DeletionRecord> {
        let mode = self.deletable_mode(id)?;
        let neighbors = self.neighbors(id);

        let measured = condition_on_quadrature(&self.state, mode, Quadrature::Q, outcome)?;
        let mut state = measured.state;
        let mut corrections = Vec::with_capacity(neighbors.len());
        for &(neighbor_id, weight) in &neighbors {
            let old_mode = self
                .nodes
                .iter()
                .find(|n| n.id == neighbor_id)
                .expect("edge endpoints are live nodes")
                .mode;
            let new_mode = if old_mode > mode { old_mode - 1 } else { old_mode };
            let amount = -weight * outcome;
            state =
                SymplecticTransform::displace_p(state.n_modes(), new_mode, amount)?
                    .apply_to(&state)?;
            corrections.push(Correction {
                mode: new_mode,
                quadrature: Quadrature::P,
                amount,
            });
        }

        self.state = state;
        self.nodes.retain(|n| n.id != id);
        for node in &mut self.nodes {
            if node.mode > mode {
                node.mode -= 1;
            }
        }
        self.edges.retain(|e| e.a != id && e.b != id);

        Ok(DeletionRecord {
            node: id,
            outcome: measured.outcome,
            corrections,
        })
    }

    fn deletable_mode(&self, id: usize) -> Result<usize> {
        let node = self.node(id)?;
        match node.kind {
            NodeKind::ThermalBase | NodeKind::GkpAncillaMarker => Ok(node.mode),
            kind => Err(Error::NodeNotDeletable {
                node: id,
                kind: format!("{kind:?}"),
            }),
        }
    }
}
