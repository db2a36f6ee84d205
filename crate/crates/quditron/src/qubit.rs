//! Qubit-circuit compilation of the qudit neuron, for validation on
//! qubit-based simulators.
//!
//! A d-dimensional neuron compiles to d−1 qubits: gate k applies
//! R_y(π − 2θ_k) to qubit k−1, empty-controlled on every earlier qubit
//! (active only when those qubits read |0⟩). The reachable outcomes are
//! the all-zeros string (qudit entry 0) and the one-hot strings 2^{j−1}
//! (entry j); any other outcome flags a hardware error. Qubit 0 is the
//! most significant bit of the outcome index, so the newest qubit is
//! least significant.

use crate::error::{Error, Result};
use crate::qudit::ThetaVector;
use serde::{Deserialize, Serialize};

/// Largest simulated dimension (2^23 amplitudes at d = 24).
pub const MAX_SIMULATED_DIMENSION: usize = 24;

/// One R_y rotation with empty controls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RyGate {
    pub target: usize,
    pub angle: f64,
    /// Qubits that must read |0⟩ for the rotation to fire.
    pub controls: Vec<usize>,
}

/// Ordered gate list over `qubits` wires.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QubitCircuit {
    pub qubits: usize,
    pub gates: Vec<RyGate>,
}

/// Real statevector over 2^qubits basis states.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    pub amplitudes: Vec<f64>,
}

impl Statevector {
    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.iter().map(|a| a * a).sum()
    }
}

/// Where a measured bitstring lands: a qudit entry or the error flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Entry(usize),
    Invalid,
}

/// Compiles a parameter vector into the d−1 qubit circuit.
pub fn compile(theta: &ThetaVector) -> Result<QubitCircuit> {
    let d = theta.dimension();
    if d > MAX_SIMULATED_DIMENSION {
        return Err(Error::DimensionTooLarge {
            d,
            max: MAX_SIMULATED_DIMENSION,
        });
    }
    let gates = (1..d)
        .map(|k| RyGate {
            target: k - 1,
            angle: std::f64::consts::PI - 2.0 * theta.angle(k),
            controls: (0..k - 1).collect(),
        })
        .collect();
    Ok(QubitCircuit {
        qubits: d - 1,
        gates,
    })
}

/// Exact statevector simulation from |0…0⟩.
pub fn simulate(circuit: &QubitCircuit) -> Statevector {
    let n = circuit.qubits;
    let size = 1usize << n;
    let mut amps = vec![0.0; size];
    amps[0] = 1.0;
    for gate in &circuit.gates {
        debug_assert!(gate.target < n);
        debug_assert!(gate.controls.iter().all(|&c| c < n && c != gate.target));
        let half = gate.angle / 2.0;
        let (co, si) = (half.cos(), half.sin());
        // qubit q occupies bit n−1−q: the newest qubit is least significant
        let target_bit = n - 1 - gate.target;
        let control_mask: usize = gate.controls.iter().map(|&c| 1usize << (n - 1 - c)).sum();
        let target_mask = 1usize << target_bit;
        for idx in 0..size {
            if idx & target_mask != 0 || idx & control_mask != 0 {
                continue;
            }
            let pair = idx | target_mask;
            let a0 = amps[idx];
            let a1 = amps[pair];
            amps[idx] = co * a0 - si * a1;
            amps[pair] = si * a0 + co * a1;
        }
    }
    Statevector { amplitudes: amps }
}

/// Maps a measured index to its qudit entry: all-zeros ↔ entry 0, the
/// one-hot 2^{j−1} ↔ entry j, everything else invalid.
pub fn outcome_of_index(index: usize, d: usize) -> Outcome {
    if index == 0 {
        return Outcome::Entry(0);
    }
    if index.is_power_of_two() {
        let j = index.trailing_zeros() as usize + 1;
        if j < d {
            return Outcome::Entry(j);
        }
    }
    Outcome::Invalid
}

/// Full outcome table for dimension `d` over d−1 qubits.
pub fn outcome_map(d: usize) -> Vec<(usize, Outcome)> {
    let size = 1usize << (d - 1);
    (0..size).map(|i| (i, outcome_of_index(i, d))).collect()
}

/// Probabilities of the d valid entries plus the aggregated invalid mass.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementDistribution {
    pub entries: Vec<f64>,
    pub invalid: f64,
}

pub fn measurement_distribution(sv: &Statevector, d: usize) -> MeasurementDistribution {
    let mut entries = vec![0.0; d];
    let mut invalid = 0.0;
    for (idx, amp) in sv.amplitudes.iter().enumerate() {
        let p = amp * amp;
        match outcome_of_index(idx, d) {
            Outcome::Entry(j) => entries[j] += p,
            Outcome::Invalid => invalid += p,
        }
    }
    MeasurementDistribution { entries, invalid }
}

/// Control arities and an elementary-gate estimate consistent with the
/// O(d²) depth of linear-cost multi-controlled rotations. No decomposition
/// is performed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateCountReport {
    pub gate_count: usize,
    pub control_arities: Vec<usize>,
    pub control_arity_sum: usize,
    pub elementary_gate_estimate: usize,
}

pub fn gate_count_report(circuit: &QubitCircuit) -> GateCountReport {
    let control_arities: Vec<usize> = circuit.gates.iter().map(|g| g.controls.len()).collect();
    let control_arity_sum = control_arities.iter().sum();
    GateCountReport {
        gate_count: circuit.gates.len(),
        control_arities,
        control_arity_sum,
        elementary_gate_estimate: circuit.gates.len() + 2 * control_arity_sum,
    }
}
