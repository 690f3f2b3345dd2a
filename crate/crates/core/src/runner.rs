//! Batch experiment driver. A run simulates `n_realizations` independent
//! networks (in parallel when enabled), reduces the per-realization
//! statistics in realization order and renders CSV tables whose bytes
//! depend only on the configuration.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::analytics::{
    self, fit_pcf, mean_interference, DistanceLaw, FitResult, PcfFamily, PcfModel, PcfSource,
};
use crate::csv::{fmt_sig, CsvTable};
use crate::error::{config, Error, Result};
use crate::estimators::{
    assignment_distances, bs_partial, bs_user_view, conditional_cell_area_from_pairs, ks_distance,
    linear_grid, mean, nn_area_pairs, pattern_partial, CellStats, CellSums, ConditionalArea,
    DistanceKind, PcfAccumulator, PcfEstimate, PcfPartial, RingGrid,
};
use crate::exec::{map_indexed, Execution};
use crate::geometry::{Point, Window};
use crate::grid::Grid;
use crate::sampling::{sample_ppp, sample_square_lattice, stream, PointPattern, Seed};
use crate::tessellation::{build_voronoi, MIN_SIDE_IN_SPACINGS};
use crate::users::{type1_users, type2_users};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    /// One user uniformly in every cell of a Poisson tessellation.
    TypeI,
    /// One user per cell chosen from an independent Poisson population.
    TypeII,
    /// Type I users on a randomly shifted square lattice.
    Lattice,
    /// Users form a Poisson process independent of the base stations.
    #[serde(rename = "PPPBaseline")]
    PppBaseline,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::TypeI => "TypeI",
            ModelKind::TypeII => "TypeII",
            ModelKind::Lattice => "Lattice",
            ModelKind::PppBaseline => "PPPBaseline",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [ModelKind::TypeI, ModelKind::TypeII, ModelKind::Lattice, ModelKind::PppBaseline]
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown model {s:?} (expected TypeI, TypeII, Lattice or PPPBaseline)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    /// User pair correlation function.
    Pcf,
    /// Pcf of the interfering users seen from a base station.
    PcfBs,
    /// Nearest-neighbor, link and nearest-interferer distances.
    Distances,
    /// Vacancy and cell-area statistics.
    Cells,
    /// Mean cell area conditioned on the nucleus nearest-neighbor distance.
    ConditionalArea,
    /// Least-squares fits of the model families to the simulated pcfs.
    Fits,
    /// Mean interference for the simulated and closed-form pcfs.
    Interference,
}

/// Flat experiment description, readable from a TOML document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    pub lambda_bs: f64,
    /// Density ratio `λ₀/λ_P` of the population process (type II only).
    pub eta: Option<f64>,
    pub window_side: f64,
    pub n_realizations: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub r_step: f64,
    pub bandwidth: f64,
    pub master_seed: u64,
    /// Path-loss exponent for the interference table.
    pub alpha: Option<f64>,
    /// Retention probability of an independent thinning of the users.
    pub retain: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    pub rho_step: f64,
    pub fit_r_min: f64,
    pub fit_r_max: f64,
    /// Requested statistics; empty selects every one the model supports.
    pub outputs: Vec<OutputKind>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: ModelKind::TypeI,
            lambda_bs: 1.0,
            eta: None,
            window_side: 20.0,
            n_realizations: 200,
            r_min: 0.05,
            r_max: 4.0,
            r_step: 0.05,
            bandwidth: 0.1,
            master_seed: 1,
            alpha: None,
            retain: 1.0,
            rho_min: 0.02,
            rho_max: 0.6,
            rho_step: 0.02,
            fit_r_min: 0.1,
            fit_r_max: 3.5,
            outputs: Vec::new(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_toml_str(&fs::read_to_string(path)?)
    }

    /// The resolved configuration as TOML, used for the CSV comment block.
    pub fn to_toml(&self) -> String {
        let mut text = toml::to_string(self).expect("config serializes");
        if self.eta.is_none() {
            text.push_str("# eta unset\n");
        }
        if self.alpha.is_none() {
            text.push_str("# alpha unset\n");
        }
        text
    }

    pub fn r_grid(&self) -> Vec<f64> {
        linear_grid(self.r_min, self.r_max, self.r_step)
    }

    pub fn rho_grid(&self) -> Vec<f64> {
        linear_grid(self.rho_min, self.rho_max, self.rho_step)
    }

    pub fn window(&self) -> Result<Window> {
        Window::torus(self.window_side)
    }

    /// Requested outputs with the empty list expanded to the defaults.
    pub fn resolved_outputs(&self) -> Vec<OutputKind> {
        if !self.outputs.is_empty() {
            return self.outputs.clone();
        }
        let mut out = vec![OutputKind::Pcf, OutputKind::PcfBs, OutputKind::Distances, OutputKind::ConditionalArea, OutputKind::Fits];
        if self.model != ModelKind::PppBaseline {
            out.push(OutputKind::Cells);
        }
        if self.alpha.is_some() {
            out.push(OutputKind::Interference);
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                config(format!("{name} must be positive and finite, got {v}"))
            }
        };
        positive("lambda_bs", self.lambda_bs)?;
        positive("window_side", self.window_side)?;
        positive("r_min", self.r_min)?;
        positive("r_step", self.r_step)?;
        positive("bandwidth", self.bandwidth)?;
        positive("rho_min", self.rho_min)?;
        positive("rho_step", self.rho_step)?;
        let min_side = MIN_SIDE_IN_SPACINGS / self.lambda_bs.sqrt();
        if self.window_side < min_side {
            return config(format!("window_side must be at least 10/sqrt(lambda_bs) = {min_side}, got {}", self.window_side));
        }
        match (self.model, self.eta) {
            (ModelKind::TypeII, None) => return config("eta is required for the TypeII model"),
            (ModelKind::TypeII, Some(eta)) => positive("eta", eta)?,
            (_, Some(_)) => return config(format!("eta is only meaningful for the TypeII model, not {}", self.model)),
            _ => {}
        }
        if self.model == ModelKind::Lattice {
            let cells = self.window_side * self.lambda_bs.sqrt();
            if (cells - cells.round()).abs() > 1e-9 * cells {
                return config(format!("lattice window side {} is not a multiple of the spacing", self.window_side));
            }
        }
        if self.n_realizations == 0 {
            return config("n_realizations must be at least 1");
        }
        if !(self.r_max > self.r_min) {
            return config("r_max must exceed r_min");
        }
        if !(self.rho_max >= self.rho_min) {
            return config("rho_max must be at least rho_min");
        }
        if !(self.retain > 0.0 && self.retain <= 1.0) {
            return config(format!("retain must lie in (0, 1], got {}", self.retain));
        }
        if !(self.fit_r_max > self.fit_r_min && self.fit_r_min >= 0.0) {
            return config("fit range must satisfy 0 <= fit_r_min < fit_r_max");
        }
        if let Some(a) = self.alpha {
            if !(a > 2.0 && a.is_finite()) {
                return config(format!("alpha must exceed 2, got {a}"));
            }
        }
        let outputs = self.resolved_outputs();
        if self.model == ModelKind::PppBaseline && outputs.contains(&OutputKind::Cells) {
            return config("cell statistics need a user model with one user per cell");
        }
        if outputs.contains(&OutputKind::Interference) && self.alpha.is_none() {
            return config("the interference output needs alpha");
        }
        let rings = RingGrid::new(&self.r_grid(), self.bandwidth).map_err(as_config)?;
        rings.check_window(&self.window()?).map_err(as_config)?;
        Ok(())
    }
}

fn as_config(e: Error) -> Error {
    match e {
        Error::Domain(m) => Error::Config(m),
        other => other,
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Needs {
    pcf: bool,
    pcf_bs: bool,
    distances: bool,
    cells: bool,
    conditional_area: bool,
}

impl Needs {
    fn from_outputs(outputs: &[OutputKind]) -> Self {
        let has = |k| outputs.contains(&k);
        Needs {
            pcf: has(OutputKind::Pcf) || has(OutputKind::Fits),
            pcf_bs: has(OutputKind::PcfBs) || has(OutputKind::Fits) || has(OutputKind::Interference),
            distances: has(OutputKind::Distances),
            cells: has(OutputKind::Cells),
            conditional_area: has(OutputKind::ConditionalArea),
        }
    }
}

/// Statistics of one realization, reduced in index order afterwards.
#[derive(Debug, Default)]
struct RealizationOut {
    pcf: Option<PcfPartial>,
    pcf_bs: Option<PcfPartial>,
    nn: Vec<f64>,
    link: Vec<f64>,
    interferer: Vec<f64>,
    cells: Option<CellSums>,
    nn_area: Vec<(f64, f64)>,
    n_bs: usize,
}

/// Reduced statistics of a whole run.
#[derive(Debug, Clone, Default)]
pub struct Simulation {
    pub pcf: Option<PcfEstimate>,
    pub pcf_bs: Option<PcfEstimate>,
    pub nn_distances: Vec<f64>,
    pub link_distances: Vec<f64>,
    pub interferer_distances: Vec<f64>,
    pub cells: Option<CellStats>,
    pub conditional_area: Option<Vec<ConditionalArea>>,
    pub realized_bs_intensity: f64,
}

fn realize(cfg: &ExperimentConfig, rings: &RingGrid, needs: Needs, index: usize) -> Result<RealizationOut> {
    let window = cfg.window()?;
    let seed = Seed(cfg.master_seed).realization(index);
    let bs = match cfg.model {
        ModelKind::Lattice => sample_square_lattice(cfg.lambda_bs, window, seed.derive(stream::BASE_STATIONS))?,
        _ => sample_ppp(cfg.lambda_bs, window, seed.derive(stream::BASE_STATIONS))?,
    };
    let tess = Arc::new(build_voronoi(&bs)?);
    let mut out = RealizationOut { n_bs: bs.len(), ..Default::default() };
    if needs.conditional_area {
        out.nn_area = nn_area_pairs(&tess);
    }

    if cfg.model == ModelKind::PppBaseline {
        let mut users = sample_ppp(cfg.lambda_bs, window, seed.derive(stream::USERS))?;
        if cfg.retain < 1.0 {
            users = users.thin(cfg.retain, seed.derive(stream::THINNING))?;
        }
        if needs.pcf {
            out.pcf = pattern_partial(&users, rings)?;
        }
        if needs.pcf_bs {
            out.pcf_bs = bs_partial(&bs.points, &users.points, &[], window, rings)?;
        }
        if needs.distances {
            baseline_distances(&bs, &users, &mut out);
        }
        return Ok(out);
    }

    let mut assign = match cfg.model {
        ModelKind::TypeII => {
            let eta = cfg.eta.expect("validated");
            let population = sample_ppp(eta * cfg.lambda_bs, window, seed.derive(stream::POPULATION))?;
            type2_users(tess, &population, seed.derive(stream::USERS))?
        }
        _ => type1_users(tess, seed.derive(stream::USERS)),
    };
    if cfg.retain < 1.0 {
        assign = assign.thin(cfg.retain, seed.derive(stream::THINNING))?;
    }
    if needs.pcf {
        out.pcf = pattern_partial(&assign.users_pattern(), rings)?;
    }
    if needs.pcf_bs {
        let (bsp, users, served) = bs_user_view(&assign);
        out.pcf_bs = bs_partial(&bsp, &users, &served, window, rings)?;
    }
    if needs.distances {
        out.nn = assignment_distances(&assign, DistanceKind::NearestNeighbor);
        out.link = assignment_distances(&assign, DistanceKind::LinkDistance);
        out.interferer = assignment_distances(&assign, DistanceKind::NearestInterferer);
    }
    if needs.cells {
        out.cells = Some(CellSums::from_assignment(&assign));
    }
    Ok(out)
}

fn baseline_distances(bs: &PointPattern, users: &PointPattern, out: &mut RealizationOut) {
    let w = bs.window;
    let nearest_all = |from: &[Point], to: &[Point], same: bool| -> Vec<f64> {
        if to.len() < 1 + usize::from(same) {
            return Vec::new();
        }
        let grid = Grid::new(to, w, 2.0);
        from.iter()
            .enumerate()
            .filter_map(|(i, p)| grid.nearest(*p, same.then_some(i)).map(|(_, d)| d))
            .collect()
    };
    out.nn = nearest_all(&users.points, &users.points, true);
    out.link = nearest_all(&users.points, &bs.points, false);
    out.interferer = nearest_all(&bs.points, &users.points, false);
}

/// Runs the realizations and reduces them in index order.
pub fn simulate(cfg: &ExperimentConfig, exec: Execution) -> Result<Simulation> {
    cfg.validate()?;
    let rings = RingGrid::new(&cfg.r_grid(), cfg.bandwidth)?;
    let needs = Needs::from_outputs(&cfg.resolved_outputs());
    let parts = map_indexed(cfg.n_realizations, exec, |i| realize(cfg, &rings, needs, i));

    let mut pcf = PcfAccumulator::new(rings.clone());
    let mut pcf_bs = PcfAccumulator::new(rings);
    let mut cells = CellSums::default();
    let mut sim = Simulation::default();
    let mut nn_area = Vec::new();
    let mut n_bs = 0usize;
    for part in parts {
        let part = part?;
        if needs.pcf {
            pcf.add(part.pcf.as_ref());
        }
        if needs.pcf_bs {
            pcf_bs.add(part.pcf_bs.as_ref());
        }
        if let Some(c) = &part.cells {
            cells.merge(c);
        }
        sim.nn_distances.extend(part.nn);
        sim.link_distances.extend(part.link);
        sim.interferer_distances.extend(part.interferer);
        nn_area.extend(part.nn_area);
        n_bs += part.n_bs;
    }
    sim.pcf = needs.pcf.then(|| pcf.finish());
    sim.pcf_bs = needs.pcf_bs.then(|| pcf_bs.finish());
    sim.cells = needs.cells.then(|| cells.stats());
    if needs.conditional_area {
        sim.conditional_area = Some(conditional_cell_area_from_pairs(nn_area, &cfg.rho_grid())?);
    }
    sim.realized_bs_intensity = n_bs as f64 / (cfg.n_realizations as f64 * cfg.window_side * cfg.window_side);
    Ok(sim)
}

/// Scalar results of a run. Distances are reported in absolute units.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Summary {
    pub model: String,
    pub n_realizations: usize,
    pub realized_bs_intensity: f64,
    pub mean_nn_distance: Option<f64>,
    pub mean_sq_nn_distance: Option<f64>,
    pub mean_link_distance: Option<f64>,
    pub mean_interferer_distance: Option<f64>,
    /// KS distance of the nearest-neighbor distances to `f_D`.
    pub ks_nn: Option<f64>,
    /// KS distance of the link distances to the corrected Rayleigh law.
    pub ks_link: Option<f64>,
    /// KS distance of the link distances to the standard Rayleigh law.
    pub ks_link_rayleigh: Option<f64>,
    pub vacancy_fraction: Option<f64>,
    pub vacancy_formula: Option<f64>,
    pub mean_area_occ: Option<f64>,
    pub mean_area_vac: Option<f64>,
    pub mean_area_crofton: Option<f64>,
    pub mean_inv_area: Option<f64>,
    pub balance: Option<f64>,
    /// Fits of the user families to the user pcf.
    pub user_fits: Vec<FitResult>,
    /// Fits of the base-station families to the base-station pcf.
    pub bs_fits: Vec<FitResult>,
}

impl Summary {
    fn key_values(&self) -> Vec<(String, String)> {
        let opt = |v: Option<f64>| v.map_or_else(String::new, fmt_sig);
        let mut kv = vec![
            ("model".to_string(), self.model.clone()),
            ("n_realizations".into(), self.n_realizations.to_string()),
            ("realized_bs_intensity".into(), fmt_sig(self.realized_bs_intensity)),
            ("mean_nn_distance".into(), opt(self.mean_nn_distance)),
            ("mean_sq_nn_distance".into(), opt(self.mean_sq_nn_distance)),
            ("mean_link_distance".into(), opt(self.mean_link_distance)),
            ("mean_interferer_distance".into(), opt(self.mean_interferer_distance)),
            ("ks_nn".into(), opt(self.ks_nn)),
            ("ks_link".into(), opt(self.ks_link)),
            ("ks_link_rayleigh".into(), opt(self.ks_link_rayleigh)),
            ("vacancy_fraction".into(), opt(self.vacancy_fraction)),
            ("vacancy_formula".into(), opt(self.vacancy_formula)),
            ("mean_area_occ".into(), opt(self.mean_area_occ)),
            ("mean_area_vac".into(), opt(self.mean_area_vac)),
            ("mean_area_crofton".into(), opt(self.mean_area_crofton)),
            ("mean_inv_area".into(), opt(self.mean_inv_area)),
            ("balance".into(), opt(self.balance)),
        ];
        for (target, fits) in [("user", &self.user_fits), ("bs", &self.bs_fits)] {
            for f in fits {
                let fam = f.model.family().name().to_ascii_lowercase();
                for (name, p) in ["a", "b", "c"].iter().zip(f.model.params()) {
                    kv.push((format!("fit_{target}_{fam}_{name}"), fmt_sig(p)));
                }
                kv.push((format!("fit_{target}_{fam}_sse"), fmt_sig(f.sse)));
            }
        }
        kv
    }

    pub fn to_table(&self) -> CsvTable {
        let mut t = CsvTable::new(&["key", "value"]);
        for (k, v) in self.key_values() {
            t.push_row(vec![k, v]);
        }
        t
    }
}

#[derive(Debug, Clone)]
pub struct OutputFile {
    pub name: String,
    pub table: CsvTable,
}

/// CSV tables of a run or figure bundle, plus the scalar summary.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub files: Vec<OutputFile>,
    pub summary: Summary,
}

impl RunOutput {
    pub fn file(&self, name: &str) -> Option<&CsvTable> {
        self.files.iter().find(|f| f.name == name).map(|f| &f.table)
    }

    /// Writes every table into `dir`, creating it if needed.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        self.files
            .iter()
            .map(|f| {
                let path = dir.join(&f.name);
                fs::write(&path, f.table.render())?;
                Ok(path)
            })
            .collect()
    }
}

fn summarize(cfg: &ExperimentConfig, sim: &Simulation, fits: Fits) -> Summary {
    let lambda = cfg.lambda_bs;
    let nonempty = |v: &[f64]| (!v.is_empty()).then_some(());
    let cdf = |kind: DistanceLaw| move |r: f64| analytics::distance_cdf(r, kind, lambda).expect("lambda validated");
    let mut s = Summary {
        model: cfg.model.to_string(),
        n_realizations: cfg.n_realizations,
        realized_bs_intensity: sim.realized_bs_intensity,
        user_fits: fits.user,
        bs_fits: fits.bs,
        ..Default::default()
    };
    if nonempty(&sim.nn_distances).is_some() {
        s.mean_nn_distance = Some(mean(&sim.nn_distances));
        s.mean_sq_nn_distance = Some(mean(&sim.nn_distances.iter().map(|d| d * d).collect::<Vec<_>>()));
        s.ks_nn = Some(ks_distance(&sim.nn_distances, cdf(DistanceLaw::NearestNeighborD)));
    }
    if nonempty(&sim.link_distances).is_some() {
        s.mean_link_distance = Some(mean(&sim.link_distances));
        s.ks_link = Some(ks_distance(&sim.link_distances, cdf(DistanceLaw::LinkDistanceR)));
        s.ks_link_rayleigh = Some(ks_distance(&sim.link_distances, cdf(DistanceLaw::RayleighStandard)));
    }
    if nonempty(&sim.interferer_distances).is_some() {
        s.mean_interferer_distance = Some(mean(&sim.interferer_distances));
    }
    if let Some(c) = &sim.cells {
        s.vacancy_fraction = Some(c.vacancy_fraction);
        s.vacancy_formula = cfg.eta.map(|eta| analytics::vacancy_probability(eta).expect("eta validated"));
        s.mean_area_occ = c.mean_area_occ;
        s.mean_area_vac = c.mean_area_vac;
        s.mean_area_crofton = Some(c.mean_area_crofton);
        s.mean_inv_area = Some(c.mean_inv_area);
        s.balance = Some(c.balance());
    }
    s
}

/// Rescales an estimate to unit intensity: `r ↦ r√λ`.
fn to_unit_intensity(est: &PcfEstimate, lambda: f64) -> PcfEstimate {
    let mut e = est.clone();
    let s = lambda.sqrt();
    e.r_grid.iter_mut().for_each(|r| *r *= s);
    e
}

fn interference_table(cfg: &ExperimentConfig, sim: &Simulation, alpha: f64) -> Result<CsvTable> {
    let mut t = CsvTable::new(&[
        "source",
        "alpha",
        "value",
        "finite",
        "small_r_order",
        "closed_form",
        "closed_form_magnitude",
        "sign_disagrees",
    ]);
    let mut rows: Vec<(String, analytics::InterferenceResult)> = Vec::new();
    if let Some(est) = &sim.pcf_bs {
        let unit = to_unit_intensity(est, cfg.lambda_bs);
        rows.push(("simulated_bs".into(), mean_interference(PcfSource::Estimate(&unit), alpha)?));
    }
    let models = [
        ("bs_prototype", PcfModel::BS_PROTOTYPE),
        ("bs_exponential", PcfModel::BS_EXPONENTIAL),
        ("bs_analytical", PcfModel::BS_ANALYTICAL),
        ("singh", PcfModel::SinghApprox),
        ("user_prototype", PcfModel::USER_PROTOTYPE),
        ("user_exponential", PcfModel::USER_EXPONENTIAL),
    ];
    for (name, m) in models {
        rows.push((name.into(), mean_interference(PcfSource::Model(&m), alpha)?));
    }
    let opt = |v: Option<f64>| v.map_or_else(String::new, fmt_sig);
    for (name, r) in rows {
        t.push_row(vec![
            name,
            fmt_sig(r.alpha),
            fmt_sig(r.value),
            u8::from(r.finite).to_string(),
            fmt_sig(r.small_r_order),
            opt(r.closed_form),
            opt(r.closed_form_magnitude),
            u8::from(r.sign_disagrees).to_string(),
        ]);
    }
    Ok(t)
}

fn distance_cdf_table(cfg: &ExperimentConfig, sim: &Simulation) -> CsvTable {
    let mut t = CsvTable::new(&["r", "cdf_nn", "cdf_nn_model", "cdf_link", "cdf_link_model", "cdf_link_rayleigh", "cdf_interferer"]);
    let sorted = |v: &[f64]| {
        let mut s = v.to_vec();
        s.sort_by(f64::total_cmp);
        s
    };
    let (nn, link, intf) = (sorted(&sim.nn_distances), sorted(&sim.link_distances), sorted(&sim.interferer_distances));
    let ecdf = |s: &[f64], r: f64| if s.is_empty() { f64::NAN } else { s.partition_point(|v| *v <= r) as f64 / s.len() as f64 };
    let lambda = cfg.lambda_bs;
    let model = |kind, r| analytics::distance_cdf(r, kind, lambda).expect("lambda validated");
    for r in linear_grid(0.0, 2.0 / lambda.sqrt(), 0.01 / lambda.sqrt()) {
        t.push_numbers(&[
            r,
            ecdf(&nn, r),
            model(DistanceLaw::NearestNeighborD, r),
            ecdf(&link, r),
            model(DistanceLaw::LinkDistanceR, r),
            model(DistanceLaw::RayleighStandard, r),
            ecdf(&intf, r),
        ]);
    }
    t
}

fn conditional_area_table(rows: &[ConditionalArea], lambda: f64) -> CsvTable {
    let mut t = CsvTable::new(&["rho", "mean_area", "n_cells", "linear_approx"]);
    for c in rows {
        // 1/2 + ρ/3 in units of 1/λ
        let approx = (0.5 + c.rho * lambda.sqrt() / 3.0) / lambda;
        t.push_row(vec![
            fmt_sig(c.rho),
            c.mean_area.map_or_else(String::new, fmt_sig),
            c.n_cells.to_string(),
            fmt_sig(approx),
        ]);
    }
    t
}

#[derive(Debug, Default)]
struct Fits {
    user: Vec<FitResult>,
    bs: Vec<FitResult>,
}

/// Fits the user families to `pcf` and the base-station families to
/// `pcf_bs`, both at unit intensity.
fn fits(cfg: &ExperimentConfig, sim: &Simulation) -> Result<Fits> {
    let range = (cfg.fit_r_min, cfg.fit_r_max);
    let fit_all = |est: &Option<PcfEstimate>, families: [PcfFamily; 3]| -> Result<Vec<FitResult>> {
        let Some(est) = est else { return Ok(Vec::new()) };
        let unit = to_unit_intensity(est, cfg.lambda_bs);
        families.into_iter().map(|fam| fit_pcf(&unit, fam, range)).collect()
    };
    Ok(Fits {
        user: fit_all(&sim.pcf, [PcfFamily::PrototypeUser, PcfFamily::Exponential, PcfFamily::Ginibre])?,
        bs: fit_all(&sim.pcf_bs, [PcfFamily::PrototypeBs, PcfFamily::ExponentialR2, PcfFamily::Ginibre])?,
    })
}

fn with_echo(table: CsvTable, echo: &str) -> CsvTable {
    table.comment_block(echo)
}

/// Runs one experiment and renders its CSV bundle.
pub fn run_experiment(cfg: &ExperimentConfig, exec: Execution) -> Result<RunOutput> {
    let sim = simulate(cfg, exec)?;
    let outputs = cfg.resolved_outputs();
    let echo = cfg.to_toml();
    let fit_results = if outputs.contains(&OutputKind::Fits) { fits(cfg, &sim)? } else { Fits::default() };
    let mut files = Vec::new();
    let mut push = |name: &str, table: CsvTable| files.push(OutputFile { name: name.into(), table: with_echo(table, &echo) });
    if outputs.contains(&OutputKind::Pcf) {
        if let Some(est) = &sim.pcf {
            push("pcf.csv", est.to_table());
        }
    }
    if outputs.contains(&OutputKind::PcfBs) {
        if let Some(est) = &sim.pcf_bs {
            push("pcf_bs.csv", est.to_table());
        }
    }
    if outputs.contains(&OutputKind::Distances) {
        push("distance_cdf.csv", distance_cdf_table(cfg, &sim));
    }
    if let Some(rows) = &sim.conditional_area {
        push("conditional_area.csv", conditional_area_table(rows, cfg.lambda_bs));
    }
    if outputs.contains(&OutputKind::Fits) {
        if sim.pcf.is_some() {
            push("fits_pcf.csv", FitResult::to_table(&fit_results.user));
        }
        if sim.pcf_bs.is_some() {
            push("fits_pcf_bs.csv", FitResult::to_table(&fit_results.bs));
        }
    }
    if outputs.contains(&OutputKind::Interference) {
        let alpha = cfg.alpha.expect("validated");
        push("interference.csv", interference_table(cfg, &sim, alpha)?);
    }
    let summary = summarize(cfg, &sim, fit_results);
    push("summary.csv", summary.to_table());
    Ok(RunOutput { files, summary })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FigureId {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
}

impl FromStr for FigureId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fig1" => Ok(FigureId::Fig1),
            "fig2" => Ok(FigureId::Fig2),
            "fig3" => Ok(FigureId::Fig3),
            "fig4" => Ok(FigureId::Fig4),
            _ => config(format!("unknown figure {s:?} (expected fig1, fig2, fig3 or fig4)")),
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = match self {
            FigureId::Fig1 => 1,
            FigureId::Fig2 => 2,
            FigureId::Fig3 => 3,
            FigureId::Fig4 => 4,
        };
        write!(f, "fig{n}")
    }
}

/// Settings shared by the figure bundles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FigureOptions {
    pub master_seed: u64,
    pub n_realizations: usize,
}

impl Default for FigureOptions {
    fn default() -> Self {
        FigureOptions { master_seed: 1, n_realizations: 200 }
    }
}

/// Density ratios of the type II sweep, `-10..=10` dB in 1 dB steps.
pub fn eta_sweep_db() -> Vec<f64> {
    (-10..=10).map(f64::from).collect()
}

/// Built-in configuration behind a figure (for fig4, the sweep template).
pub fn figure_config(id: FigureId, opts: FigureOptions) -> ExperimentConfig {
    let base = ExperimentConfig { master_seed: opts.master_seed, n_realizations: opts.n_realizations, ..Default::default() };
    match id {
        FigureId::Fig1 => ExperimentConfig { r_min: 0.02, r_max: 3.5, r_step: 0.02, bandwidth: 0.04, outputs: vec![OutputKind::Pcf], ..base },
        FigureId::Fig2 => ExperimentConfig { outputs: vec![OutputKind::ConditionalArea], ..base },
        FigureId::Fig3 => ExperimentConfig { r_min: 0.02, r_max: 3.0, r_step: 0.02, bandwidth: 0.04, outputs: vec![OutputKind::PcfBs], ..base },
        FigureId::Fig4 => ExperimentConfig {
            model: ModelKind::TypeII,
            eta: Some(1.0),
            outputs: vec![OutputKind::Cells, OutputKind::Distances],
            ..base
        },
    }
}

fn overlay_table(est: &PcfEstimate, sim_name: &str, overlays: &[(&str, PcfModel)]) -> CsvTable {
    let mut header = vec!["r", sim_name, "stderr"];
    header.extend(overlays.iter().map(|(n, _)| *n));
    let mut t = CsvTable::new(&header);
    for (k, r) in est.r_grid.iter().enumerate() {
        let mut row = vec![*r, est.g_hat[k], est.stderr[k]];
        row.extend(overlays.iter().map(|(_, m)| m.value(*r)));
        t.push_numbers(&row);
    }
    t
}

/// CSV bundle with the simulated curves and analytical overlays of a figure.
pub fn figure_command(id: FigureId, opts: FigureOptions, exec: Execution) -> Result<RunOutput> {
    let cfg = figure_config(id, opts);
    let echo = format!("figure = \"{id}\"\n{}", cfg.to_toml());
    let file = |table: CsvTable| OutputFile { name: format!("{id}.csv"), table: with_echo(table, &echo) };
    match id {
        FigureId::Fig1 => {
            let sim = simulate(&cfg, exec)?;
            let est = sim.pcf.as_ref().expect("pcf requested");
            let table = overlay_table(
                est,
                "g_sim",
                &[
                    ("g_prototype", PcfModel::USER_PROTOTYPE),
                    ("g_exponential", PcfModel::USER_EXPONENTIAL),
                    ("g_ginibre", PcfModel::ExponentialR2 { a: 12.0 * std::f64::consts::PI / 5.0 }),
                ],
            );
            Ok(RunOutput { files: vec![file(table)], summary: summarize(&cfg, &sim, Fits::default()) })
        }
        FigureId::Fig2 => {
            let sim = simulate(&cfg, exec)?;
            let rows = sim.conditional_area.as_ref().expect("conditional area requested");
            let table = conditional_area_table(rows, cfg.lambda_bs);
            Ok(RunOutput { files: vec![file(table)], summary: summarize(&cfg, &sim, Fits::default()) })
        }
        FigureId::Fig3 => {
            let sim = simulate(&cfg, exec)?;
            let est = sim.pcf_bs.as_ref().expect("pcf_bs requested");
            let table = overlay_table(
                est,
                "gbs_sim",
                &[
                    ("gbs_analytical", PcfModel::BS_ANALYTICAL),
                    ("gbs_prototype", PcfModel::BS_PROTOTYPE),
                    ("gbs_exponential", PcfModel::BS_EXPONENTIAL),
                    ("gbs_singh", PcfModel::SinghApprox),
                ],
            );
            Ok(RunOutput { files: vec![file(table)], summary: summarize(&cfg, &sim, Fits::default()) })
        }
        FigureId::Fig4 => {
            let mut t = CsvTable::new(&[
                "eta_db",
                "eta",
                "nu_formula",
                "nu_hat",
                "mean_area_occ",
                "mean_area_vac",
                "mean_link_distance",
                "ratio_area_occ_link_sq",
            ]);
            let mut last = Summary::default();
            for db in eta_sweep_db() {
                let eta = 10f64.powf(db / 10.0);
                let c = ExperimentConfig { eta: Some(eta), ..cfg.clone() };
                let sim = simulate(&c, exec)?;
                let s = summarize(&c, &sim, Fits::default());
                let er = s.mean_link_distance.unwrap_or(f64::NAN);
                let occ = s.mean_area_occ.unwrap_or(f64::NAN);
                t.push_numbers(&[
                    db,
                    eta,
                    analytics::vacancy_probability(eta)?,
                    s.vacancy_fraction.unwrap_or(f64::NAN),
                    occ,
                    s.mean_area_vac.unwrap_or(f64::NAN),
                    er,
                    occ / (er * er),
                ]);
                last = s;
            }
            Ok(RunOutput { files: vec![file(t)], summary: last })
        }
    }
}
