//! Small-signal receiver network: PV cell (photocurrent source, r ∥ C ∥ R_sh),
//! series R_s and wire inductance L, then the communication / energy
//! harvesting split (C_0 + R_C signal branch, L_0 + R_L charging branch).
//! The output is the voltage across R_C.
//!
//! Two independent evaluation routes exist: the closed-form ladder
//! expression in [`signal_response`], and a general nodal-admittance solve
//! ([`Netlist`]) that also yields every thermal-noise transfer.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check, Error, Result};
use crate::pv_ac::CellDynamics;
use crate::pv_dc::PvParams;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkParams {
    /// Wire inductance L [H].
    pub wire_inductance: f64,
    /// AC choke L_0 [H].
    pub choke_inductance: f64,
    /// Coupling capacitor C_0 [F].
    pub coupling_capacitance: f64,
    /// Communication resistor R_C [Ω].
    pub r_comm: f64,
    /// Load resistor R_L [Ω].
    pub r_load: f64,
}

impl Default for NetworkParams {
    fn default() -> Self {
        Self {
            wire_inductance: 120e-9,
            choke_inductance: 40e-3,
            coupling_capacitance: 6e-12,
            r_comm: 300.0,
            r_load: 0.6,
        }
    }
}

impl NetworkParams {
    pub fn validate(&self) -> Result<()> {
        check(
            self.wire_inductance > 0.0,
            "network.wire_inductance",
            "must be > 0",
        )?;
        check(
            self.choke_inductance > 0.0,
            "network.choke_inductance",
            "must be > 0",
        )?;
        check(
            self.coupling_capacitance > 0.0,
            "network.coupling_capacitance",
            "must be > 0",
        )?;
        check(self.r_comm > 0.0, "network.r_comm", "must be > 0")?;
        check(self.r_load > 0.0, "network.r_load", "must be > 0")
    }
}

/// Every element value of the receiver's AC equivalent circuit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SmallSignalModel {
    pub r: f64,
    pub c: f64,
    pub r_shunt: f64,
    pub r_series: f64,
    pub wire_inductance: f64,
    pub choke_inductance: f64,
    pub coupling_capacitance: f64,
    pub r_comm: f64,
    pub r_load: f64,
}

impl SmallSignalModel {
    pub fn assemble(cell: &CellDynamics, pv: &PvParams, net: &NetworkParams) -> Result<Self> {
        let m = Self {
            r: cell.r,
            c: cell.c,
            r_shunt: pv.r_shunt,
            r_series: pv.r_series,
            wire_inductance: net.wire_inductance,
            choke_inductance: net.choke_inductance,
            coupling_capacitance: net.coupling_capacitance,
            r_comm: net.r_comm,
            r_load: net.r_load,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("model.r", self.r),
            ("model.c", self.c),
            ("model.r_shunt", self.r_shunt),
            ("model.r_series", self.r_series),
            ("model.wire_inductance", self.wire_inductance),
            ("model.choke_inductance", self.choke_inductance),
            ("model.coupling_capacitance", self.coupling_capacitance),
            ("model.r_comm", self.r_comm),
            ("model.r_load", self.r_load),
        ];
        for (field, v) in positive {
            check(
                v > 0.0 && v.is_finite(),
                field,
                format!("must be finite and > 0, got {v}"),
            )?;
        }
        Ok(())
    }

    /// Resistance of the thermal source `s`; `None` for the photocurrent.
    pub fn resistance(&self, s: Source) -> Option<f64> {
        match s {
            Source::Photocurrent => None,
            Source::Dynamic => Some(self.r),
            Source::Shunt => Some(self.r_shunt),
            Source::Series => Some(self.r_series),
            Source::Load => Some(self.r_load),
            Source::Comm => Some(self.r_comm),
        }
    }
}

/// Current sources that can drive the network.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Source {
    Photocurrent,
    /// Dynamic resistance r.
    Dynamic,
    Shunt,
    Series,
    Load,
    Comm,
}

impl Source {
    /// The five resistive noise sources, in output-column order.
    pub const THERMAL: [Source; 5] = [
        Source::Comm,
        Source::Shunt,
        Source::Load,
        Source::Dynamic,
        Source::Series,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Source::Photocurrent => "signal",
            Source::Dynamic => "r",
            Source::Shunt => "Rsh",
            Source::Series => "Rs",
            Source::Load => "RL",
            Source::Comm => "RC",
        }
    }
}

fn jw(omega: f64) -> Complex64 {
    Complex64::new(0.0, omega)
}

/// Impedance of the two-branch splitter seen from its input node.
pub fn branch_impedance_zlc(omega: f64, m: &SmallSignalModel) -> Complex64 {
    let z_eh = jw(omega) * m.choke_inductance + m.r_load;
    let z_comm = 1.0 / (jw(omega) * m.coupling_capacitance) + m.r_comm;
    z_eh * z_comm / (z_eh + z_comm)
}

/// Closed-form transimpedance from photocurrent to the voltage across R_C [V/A].
pub fn signal_response(omega: f64, m: &SmallSignalModel) -> Complex64 {
    let z_lc = branch_impedance_zlc(omega, m);
    let z_series = m.r_series + jw(omega) * m.wire_inductance + z_lc;
    let z_c0 = 1.0 / (jw(omega) * m.coupling_capacitance);
    let numerator = (z_lc / z_series) * (m.r_comm / (z_c0 + m.r_comm));
    let denominator = 1.0 / m.r + jw(omega) * m.c + 1.0 / m.r_shunt + 1.0 / z_series;
    numerator / denominator
}

// ---------------------------------------------------------------------------
// Nodal analysis
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Kind {
    Resistor(f64),
    Capacitor(f64),
    Inductor(f64),
}

/// Two-terminal element; `None` terminals are ground.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Element {
    pub a: Option<usize>,
    pub b: Option<usize>,
    pub kind: Kind,
}

impl Element {
    fn admittance(&self, omega: f64) -> Complex64 {
        match self.kind {
            Kind::Resistor(r) => Complex64::new(1.0 / r, 0.0),
            Kind::Capacitor(c) => jw(omega) * c,
            Kind::Inductor(l) => 1.0 / (jw(omega) * l),
        }
    }
}

/// Linear RLC network for complex nodal analysis.
#[derive(Clone, Debug, Default)]
pub struct Netlist {
    nodes: usize,
    elements: Vec<Element>,
}

impl Netlist {
    pub fn new(nodes: usize) -> Self {
        Self {
            nodes,
            elements: Vec::new(),
        }
    }

    pub fn add(&mut self, a: Option<usize>, b: Option<usize>, kind: Kind) -> usize {
        self.elements.push(Element { a, b, kind });
        self.elements.len() - 1
    }

    pub fn element(&self, idx: usize) -> &Element {
        &self.elements[idx]
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn admittance_matrix(&self, omega: f64) -> Vec<Vec<Complex64>> {
        let n = self.nodes;
        let mut y = vec![vec![Complex64::new(0.0, 0.0); n]; n];
        for e in &self.elements {
            let g = e.admittance(omega);
            if let Some(a) = e.a {
                y[a][a] += g;
            }
            if let Some(b) = e.b {
                y[b][b] += g;
            }
            if let (Some(a), Some(b)) = (e.a, e.b) {
                y[a][b] -= g;
                y[b][a] -= g;
            }
        }
        y
    }

    /// Node voltages for each current-injection vector in `rhs`.
    pub fn solve(&self, omega: f64, rhs: &[Vec<Complex64>]) -> Result<Vec<Vec<Complex64>>> {
        let lu = Lu::factor(self.admittance_matrix(omega)).ok_or(Error::SingularMatrix { omega })?;
        Ok(rhs.iter().map(|b| lu.solve(b)).collect())
    }

    /// Injection vector for a unit current source in parallel with element `idx`.
    pub fn norton_injection(&self, idx: usize) -> Vec<Complex64> {
        let mut b = vec![Complex64::new(0.0, 0.0); self.nodes];
        let e = &self.elements[idx];
        if let Some(a) = e.a {
            b[a] += 1.0;
        }
        if let Some(n) = e.b {
            b[n] -= 1.0;
        }
        b
    }
}

/// LU factors with partial pivoting of a dense complex matrix.
struct Lu {
    a: Vec<Vec<Complex64>>,
    perm: Vec<usize>,
}

impl Lu {
    fn factor(mut a: Vec<Vec<Complex64>>) -> Option<Self> {
        let n = a.len();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a
            .iter()
            .flat_map(|row| row.iter().map(|v| v.norm()))
            .fold(0.0, f64::max);
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| a[i][k].norm().total_cmp(&a[j][k].norm()))?;
            if !(a[p][k].norm() > scale * 1e-300) {
                return None;
            }
            a.swap(k, p);
            perm.swap(k, p);
            for i in k + 1..n {
                let (upper, lower) = a.split_at_mut(i);
                let (pivot, row) = (&upper[k], &mut lower[0]);
                let factor = row[k] / pivot[k];
                row[k] = factor;
                for (x, &y) in row[k + 1..].iter_mut().zip(&pivot[k + 1..]) {
                    *x -= factor * y;
                }
            }
        }
        Some(Self { a, perm })
    }

    fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.a.len();
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let t = self.a[i][j] * x[j];
                x[i] -= t;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let t = self.a[i][j] * x[j];
                x[i] -= t;
            }
            x[i] /= self.a[i][i];
        }
        x
    }
}

/// The receiver circuit as a netlist, with element handles for each source.
#[derive(Clone, Debug)]
pub struct ReceiverCircuit {
    pub netlist: Netlist,
    pub output_node: usize,
    dynamic: usize,
    shunt: usize,
    series: usize,
    load: usize,
    comm: usize,
}

impl ReceiverCircuit {
    const DIODE: usize = 0;
    const SERIES_MID: usize = 1;
    const SPLIT: usize = 2;
    const CHARGE: usize = 3;
    const COMM: usize = 4;

    pub fn build(m: &SmallSignalModel) -> Self {
        let mut net = Netlist::new(5);
        let (d, s, x, h, c) = (
            Some(Self::DIODE),
            Some(Self::SERIES_MID),
            Some(Self::SPLIT),
            Some(Self::CHARGE),
            Some(Self::COMM),
        );
        let dynamic = net.add(d, None, Kind::Resistor(m.r));
        net.add(d, None, Kind::Capacitor(m.c));
        let shunt = net.add(d, None, Kind::Resistor(m.r_shunt));
        let series = net.add(d, s, Kind::Resistor(m.r_series));
        net.add(s, x, Kind::Inductor(m.wire_inductance));
        net.add(x, h, Kind::Inductor(m.choke_inductance));
        let load = net.add(h, None, Kind::Resistor(m.r_load));
        net.add(x, c, Kind::Capacitor(m.coupling_capacitance));
        let comm = net.add(c, None, Kind::Resistor(m.r_comm));
        Self {
            netlist: net,
            output_node: Self::COMM,
            dynamic,
            shunt,
            series,
            load,
            comm,
        }
    }

    fn injection(&self, source: Source) -> Vec<Complex64> {
        let idx = match source {
            // photocurrent flows from ground into the junction node, like a source across r
            Source::Photocurrent | Source::Dynamic => self.dynamic,
            Source::Shunt => self.shunt,
            Source::Series => self.series,
            Source::Load => self.load,
            Source::Comm => self.comm,
        };
        self.netlist.norton_injection(idx)
    }

    /// Output voltage per unit current of each requested source.
    pub fn transfers(&self, omega: f64, sources: &[Source]) -> Result<Vec<Complex64>> {
        let rhs: Vec<_> = sources.iter().map(|&s| self.injection(s)).collect();
        let v = self.netlist.solve(omega, &rhs)?;
        Ok(v.into_iter().map(|v| v[self.output_node]).collect())
    }
}

/// Nodal-analysis transfer from a unit current `source` to the voltage across R_C.
pub fn mna_transfer(omega: f64, m: &SmallSignalModel, source: Source) -> Result<Complex64> {
    Ok(ReceiverCircuit::build(m).transfers(omega, &[source])?[0])
}

/// Input impedance of the splitter computed by nodal analysis.
pub fn mna_splitter_impedance(omega: f64, m: &SmallSignalModel) -> Result<Complex64> {
    let mut net = Netlist::new(3);
    net.add(Some(0), Some(1), Kind::Inductor(m.choke_inductance));
    net.add(Some(1), None, Kind::Resistor(m.r_load));
    net.add(Some(0), Some(2), Kind::Capacitor(m.coupling_capacitance));
    net.add(Some(2), None, Kind::Resistor(m.r_comm));
    let mut b = vec![Complex64::new(0.0, 0.0); 3];
    b[0] = Complex64::new(1.0, 0.0);
    Ok(net.solve(omega, &[b])?[0][0])
}

// ---------------------------------------------------------------------------
// Frequency grids
// ---------------------------------------------------------------------------

/// Values sampled on a strictly increasing, positive frequency grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumGrid<T> {
    frequencies: Vec<f64>,
    values: Vec<T>,
}

impl<T> SpectrumGrid<T> {
    pub fn new(frequencies: Vec<f64>, values: Vec<T>) -> Result<Self> {
        if frequencies.len() != values.len() {
            return Err(Error::Analysis(format!(
                "grid has {} frequencies but {} values",
                frequencies.len(),
                values.len()
            )));
        }
        if frequencies.iter().any(|&f| !(f > 0.0)) {
            return Err(Error::Analysis("frequencies must be > 0".into()));
        }
        if frequencies.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Analysis("frequencies must be strictly increasing".into()));
        }
        Ok(Self { frequencies, values })
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> SpectrumGrid<U> {
        SpectrumGrid {
            frequencies: self.frequencies.clone(),
            values: self.values.iter().map(f).collect(),
        }
    }
}

impl SpectrumGrid<f64> {
    /// Value at `freq`, interpolated linearly in log-frequency.
    pub fn interpolate(&self, freq: f64) -> Result<f64> {
        let f = &self.frequencies;
        let out = || Error::OutOfGrid {
            freq,
            lo: f.first().copied().unwrap_or(f64::NAN),
            hi: f.last().copied().unwrap_or(f64::NAN),
        };
        if f.is_empty() || !(freq >= f[0] && freq <= f[f.len() - 1]) {
            return Err(out());
        }
        let k = f.partition_point(|&x| x <= freq);
        if k == f.len() {
            return Ok(self.values[f.len() - 1]);
        }
        let (f0, f1) = (f[k - 1], f[k]);
        let t = (freq / f0).ln() / (f1 / f0).ln();
        Ok(self.values[k - 1] + t * (self.values[k] - self.values[k - 1]))
    }
}

/// `n` log-spaced frequencies from `lo` to `hi` inclusive.
pub fn log_frequencies(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let step = (hi / lo).ln() / (n - 1) as f64;
            let mut v: Vec<f64> = (0..n).map(|k| lo * (step * k as f64).exp()).collect();
            v[n - 1] = hi;
            v
        }
    }
}

/// |H|² on a grid, from the closed-form expression.
pub fn signal_power_gain(frequencies: &[f64], m: &SmallSignalModel) -> Result<SpectrumGrid<f64>> {
    let values = crate::parallel::map(frequencies, |&f| {
        signal_response(std::f64::consts::TAU * f, m).norm_sqr()
    });
    SpectrumGrid::new(frequencies.to_vec(), values)
}

/// Width of the contiguous band around the peak where |H|² ≥ peak/2.
///
/// Band edges are interpolated linearly between grid points. An edge that
/// runs into the end of the grid is taken at the grid end; a band that
/// covers the whole grid is an error.
pub fn bandwidth_3db(gain: &SpectrumGrid<f64>) -> Result<f64> {
    Ok(passband_3db(gain)?.width())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Passband {
    pub lower: f64,
    pub upper: f64,
    pub peak_frequency: f64,
    pub peak: f64,
    /// The lower edge sits on the first grid point.
    pub lower_clipped: bool,
}

impl Passband {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

pub fn passband_3db(gain: &SpectrumGrid<f64>) -> Result<Passband> {
    let (f, h) = (gain.frequencies(), gain.values());
    if f.len() < 3 {
        return Err(Error::Analysis("grid too short for a passband".into()));
    }
    let (ipk, &peak) = h
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| Error::Analysis("empty grid".into()))?;
    if !(peak > 0.0 && peak.is_finite()) {
        return Err(Error::Analysis(
            "no passband: response is zero or non-finite".into(),
        ));
    }
    let half = peak / 2.0;
    let cross = |i: usize, j: usize| {
        let t = (half - h[i]) / (h[j] - h[i]);
        f[i] + t * (f[j] - f[i])
    };
    let mut lo = ipk;
    while lo > 0 && h[lo - 1] >= half {
        lo -= 1;
    }
    let mut hi = ipk;
    while hi + 1 < h.len() && h[hi + 1] >= half {
        hi += 1;
    }
    let lower_clipped = lo == 0;
    let upper_clipped = hi + 1 == h.len();
    if lower_clipped && upper_clipped {
        return Err(Error::Analysis(
            "no passband: response stays within 3 dB across the whole grid".into(),
        ));
    }
    if upper_clipped {
        return Err(Error::Analysis(
            "no passband: upper 3 dB edge lies beyond the grid".into(),
        ));
    }
    let lower = if lower_clipped { f[0] } else { cross(lo - 1, lo) };
    let upper = cross(hi, hi + 1);
    Ok(Passband {
        lower,
        upper,
        peak_frequency: f[ipk],
        peak,
        lower_clipped,
    })
}
