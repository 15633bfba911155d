use std::fmt::Write as _;
use std::ops::RangeInclusive;

use crate::data::StateVector;
use crate::error::{Error, Result};

/// Absolute forecast errors for every test instance and bus, stored
/// instance-major. Instances and buses are numbered from 1 in exports.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorTrace {
    n_buses: usize,
    ae_vm: Vec<f64>,
    ae_va: Vec<f64>,
}

/// One exported trace row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub instance: usize,
    pub bus: usize,
    pub ae_vm: f64,
    pub ae_va: f64,
}

pub const TRACE_HEADER: &str = "instance,bus,ae_vm,ae_va";

impl ErrorTrace {
    pub(crate) fn from_pairs(preds: &[StateVector], truths: &[StateVector], n: usize) -> Result<Self> {
        let mut ae_vm = Vec::with_capacity(preds.len() * n);
        let mut ae_va = Vec::with_capacity(preds.len() * n);
        for (p, t) in preds.iter().zip(truths) {
            if p.n_buses() != n || t.n_buses() != n {
                return Err(Error::shape("trace state width", 2 * n, p.as_slice().len()));
            }
            ae_vm.extend(p.magnitudes().iter().zip(t.magnitudes()).map(|(a, b)| (a - b).abs()));
            ae_va.extend(p.angles().iter().zip(t.angles()).map(|(a, b)| (a - b).abs()));
        }
        Ok(Self { n_buses: n, ae_vm, ae_va })
    }

    /// Mean and maximum, summing in storage order.
    pub fn avg_max(values: &[f64]) -> (f64, f64) {
        let sum: f64 = values.iter().sum();
        let max = values.iter().copied().fold(0.0, f64::max);
        (sum / values.len() as f64, max)
    }

    pub fn n_buses(&self) -> usize {
        self.n_buses
    }

    pub fn n_instances(&self) -> usize {
        self.ae_vm.len() / self.n_buses
    }

    pub fn magnitude_errors(&self) -> &[f64] {
        &self.ae_vm
    }

    pub fn angle_errors(&self) -> &[f64] {
        &self.ae_va
    }

    /// All buses at one (1-based) test instance.
    pub fn at_instance(&self, instance: usize) -> Result<Vec<TraceRow>> {
        self.check_instance(instance)?;
        Ok((1..=self.n_buses).map(|bus| self.row(instance, bus)).collect())
    }

    /// One (1-based) bus across an inclusive range of test instances.
    pub fn bus_over(&self, bus: usize, instances: RangeInclusive<usize>) -> Result<Vec<TraceRow>> {
        if bus < 1 || bus > self.n_buses {
            return Err(Error::InvalidArgument(format!(
                "bus {bus} outside 1..={}",
                self.n_buses
            )));
        }
        self.check_instance(*instances.start())?;
        self.check_instance(*instances.end())?;
        Ok(instances.map(|i| self.row(i, bus)).collect())
    }

    pub fn rows(&self) -> impl Iterator<Item = TraceRow> + '_ {
        (1..=self.n_instances()).flat_map(move |i| (1..=self.n_buses).map(move |b| self.row(i, b)))
    }

    fn row(&self, instance: usize, bus: usize) -> TraceRow {
        let k = (instance - 1) * self.n_buses + (bus - 1);
        TraceRow {
            instance,
            bus,
            ae_vm: self.ae_vm[k],
            ae_va: self.ae_va[k],
        }
    }

    fn check_instance(&self, instance: usize) -> Result<()> {
        if instance < 1 || instance > self.n_instances() {
            return Err(Error::InvalidArgument(format!(
                "instance {instance} outside 1..={}",
                self.n_instances()
            )));
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        rows_to_csv(self.rows())
    }
}

/// `instance,bus,ae_vm,ae_va` with shortest round-trip floats.
pub fn rows_to_csv(rows: impl IntoIterator<Item = TraceRow>) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{},{},{},{}", r.instance, r.bus, r.ae_vm, r.ae_va);
    }
    out
}
