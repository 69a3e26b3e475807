//! Flat INI configuration.
//!
//! Every key lives in one table that drives parsing, `--help` output and the
//! `fixture:` markers. Parsing collects all problems before returning.

use std::collections::BTreeMap;
use std::fmt;

use crate::design::{DesignTargets, FleetSpec};
use crate::error::Error;
use crate::model::{characteristic, cutoff_from_omega0, DroopBank};
use crate::mpt::{MptCircuit, MptFixture, MptOperatingPoint, PlaneSpec, PowerConvention};
use crate::sim::{GridModel, InertiaParams, LoadProfile, Scenario, DEFAULT_DT};

/// Where a value or warning originates.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
#[serde(tag = "kind", content = "at", rename_all = "snake_case")]
pub enum Location {
    /// 1-based line of the config file.
    Line(usize),
    /// Command-line flag.
    Flag(String),
    /// Simulation time [s].
    Time(f64),
    /// Built-in default, no user input involved.
    Default,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Line(n) => write!(f, "line {n}"),
            Location::Flag(name) => write!(f, "flag --{name}"),
            Location::Time(t) => write!(f, "t = {t} s"),
            Location::Default => write!(f, "default"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigIssue {
    pub location: Location,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct ConfigErrors(pub Vec<ConfigIssue>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, issue) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    Number,
    Count,
    /// Comma-separated `t:p` pairs.
    Breakpoints,
    /// Comma-separated numbers.
    List,
    Name,
}

#[derive(Debug, Clone, Copy)]
pub struct KeySpec {
    pub section: &'static str,
    pub key: &'static str,
    pub unit: &'static str,
    pub kind: ValueKind,
    /// Default not taken from published parameters.
    pub fixture: bool,
    pub doc: &'static str,
}

/// Resolved scalar parameters before cross-section defaults are applied.
#[derive(Debug, Clone)]
struct Values {
    bank: DroopBank,
    inertia: InertiaParams,
    grid: GridModel,
    t_end: f64,
    dt: f64,
    soc0: f64,
    e_rated: f64,
    circuit: MptCircuit,
    op: MptOperatingPoint,
    p_grid: f64,
    dq_scale: f64,
    plane: PlaneSpec,
    design: DesignTargets,
}

macro_rules! numeric_keys {
    ($( $section:literal $key:literal => $($field:ident).+ , $unit:literal, $fixture:literal, $doc:literal; )*) => {
        const NUMERIC_KEYS: &[KeySpec] = &[
            $( KeySpec { section: $section, key: $key, unit: $unit, kind: ValueKind::Number, fixture: $fixture, doc: $doc }, )*
        ];
        fn numeric_slot<'a>(v: &'a mut Values, section: &str, key: &str) -> Option<&'a mut f64> {
            match (section, key) {
                $( ($section, $key) => Some(&mut v.$($field).+), )*
                _ => None,
            }
        }
    };
}

numeric_keys! {
    "droop" "alpha" => bank.alpha, "V/W", false, "AEL static droop";
    "droop" "beta" => bank.beta, "V/W", false, "PEMEL resistive droop";
    "droop" "gamma" => bank.gamma, "W*s/V", false, "PEMEL integral droop";
    "droop" "zeta" => bank.zeta, "W*s/V", false, "SC capacitive droop";
    "droop" "k" => bank.k, "1/s", false, "SC washout corner";
    "droop" "v_ref" => bank.v_ref, "V", false, "DC bus reference voltage";
    "inertia" "j" => inertia.j, "W*s/Hz", false, "virtual inertia J";
    "inertia" "d" => inertia.d, "W/Hz", false, "virtual damping D";
    "inertia" "f_ref" => inertia.f_ref, "Hz", false, "nominal grid frequency";
    "inertia" "p_ref" => inertia.p_ref, "W", true, "scheduled storage draw";
    "grid" "m_g" => grid.m_g, "W*s/Hz", true, "aggregate grid inertia";
    "grid" "d_g" => grid.d_g, "W/Hz", true, "grid damping";
    "grid" "p_gen" => grid.p_gen, "W", true, "scheduled grid generation";
    "scenario" "t_end" => t_end, "s", true, "simulation horizon";
    "scenario" "dt" => dt, "s", true, "fixed integration step";
    "scenario" "soc0" => soc0, "-", true, "initial SC state of charge";
    "scenario" "e_rated" => e_rated, "J", true, "SC rated energy";
    "mpt" "r_sr" => circuit.r_sr, "Ohm", true, "grid-side source resistance";
    "mpt" "l_r" => circuit.l_r, "H", true, "grid-side source inductance";
    "mpt" "r_d1" => circuit.r_d1, "Ohm", true, "PEMEL interconnect resistance";
    "mpt" "r_d2" => circuit.r_d2, "Ohm", true, "AEL interconnect resistance";
    "mpt" "r_d3" => circuit.r_d3, "Ohm", true, "SC interconnect resistance";
    "mpt" "l_d1" => circuit.l_d1, "H", true, "PEMEL interconnect inductance";
    "mpt" "l_d2" => circuit.l_d2, "H", true, "AEL interconnect inductance";
    "mpt" "l_d3" => circuit.l_d3, "H", true, "SC interconnect inductance";
    "mpt" "r_fp" => circuit.r_fp, "Ohm", true, "PEMEL filter resistance";
    "mpt" "r_fa" => circuit.r_fa, "Ohm", true, "AEL filter resistance";
    "mpt" "r_fs" => circuit.r_fs, "Ohm", true, "SC filter resistance";
    "mpt" "l_fp" => circuit.l_fp, "H", true, "PEMEL filter inductance";
    "mpt" "l_fa" => circuit.l_fa, "H", true, "AEL filter inductance";
    "mpt" "l_fs" => circuit.l_fs, "H", true, "SC filter inductance";
    "mpt" "c_dcr" => circuit.c_dcr, "F", false, "inverter-side bus capacitance";
    "mpt" "c_dc1" => circuit.c_dc1, "F", false, "PEMEL capacitance";
    "mpt" "c_dc2" => circuit.c_dc2, "F", false, "AEL capacitance";
    "mpt" "c_dc3" => circuit.c_dc3, "F", false, "SC capacitance";
    "mpt" "k_ipr" => op.k_ipr, "-", true, "grid-side current-loop proportional gain";
    "mpt" "k_ip1" => op.k_ip1, "-", false, "PEMEL current-loop proportional gain";
    "mpt" "k_ip2" => op.k_ip2, "-", false, "AEL current-loop proportional gain";
    "mpt" "k_ip3" => op.k_ip3, "-", false, "SC current-loop proportional gain";
    "mpt" "d_grid" => op.d_grid, "W/Hz", true, "grid damping seen by the rectifier";
    "mpt" "v_gdr" => op.v_gdr, "V", false, "d-axis grid voltage (peak of 220 V rms)";
    "mpt" "v_dcr" => op.v_dcr, "V", false, "rectifier bus voltage";
    "mpt" "v_p" => op.v_p, "V", true, "PEMEL capacitor voltage";
    "mpt" "v_a" => op.v_a, "V", true, "AEL capacitor voltage";
    "mpt" "v_s" => op.v_s, "V", true, "SC capacitor voltage";
    "mpt" "i_p" => op.i_p, "A", true, "PEMEL inductor current";
    "mpt" "i_a" => op.i_a, "A", true, "AEL inductor current";
    "mpt" "i_s" => op.i_s, "A", true, "SC inductor current";
    "mpt" "i_pref" => op.i_pref, "A", true, "PEMEL current reference";
    "mpt" "i_aref" => op.i_aref, "A", true, "AEL current reference";
    "mpt" "i_sref" => op.i_sref, "A", true, "SC current reference";
    "mpt" "duty_p" => op.duty_p, "-", true, "PEMEL duty ratio";
    "mpt" "duty_a" => op.duty_a, "-", true, "AEL duty ratio";
    "mpt" "duty_s" => op.duty_s, "-", true, "SC duty ratio";
    "mpt" "p_grid" => p_grid, "W", true, "grid power; sets i_drref";
    "mpt" "dq_scale" => dq_scale, "-", false, "P = dq_scale * v_gdr * i_drref";
    "sweep" "p_grid_min" => plane.p_grid_min, "W", false, "first grid-power sample";
    "sweep" "p_grid_max" => plane.p_grid_max, "W", false, "last grid-power sample";
    "sweep" "c_dc2_min" => plane.c_dc2_min, "F", false, "first AEL capacitance sample";
    "sweep" "c_dc2_max" => plane.c_dc2_max, "F", false, "last AEL capacitance sample";
    "design" "tau" => design.tau, "s", false, "response time constant (default: from [droop])";
    "design" "xi" => design.xi, "-", false, "damping target (default: from [droop])";
    "design" "k1" => design.k1, "-", false, "AEL/PEMEL sharing index (default: from [droop])";
    "design" "k2" => design.k2, "-", false, "SC/PEMEL sharing index (default: from [droop])";
    "design" "alpha" => design.alpha, "V/W", false, "given AEL droop (default: from [droop])";
}

const OTHER_KEYS: &[KeySpec] = &[
    KeySpec {
        section: "scenario",
        key: "load",
        unit: "s:W",
        kind: ValueKind::Breakpoints,
        fixture: true,
        doc: "load breakpoints `t:p, t:p`",
    },
    KeySpec {
        section: "mpt",
        key: "fixture",
        unit: "-",
        kind: ValueKind::Name,
        fixture: true,
        doc: "base parameter set: nominal | boundary",
    },
    KeySpec {
        section: "mpt",
        key: "d_vi",
        unit: "W/Hz",
        kind: ValueKind::Number,
        fixture: false,
        doc: "virtual damping (default: [inertia] d)",
    },
    KeySpec {
        section: "mpt",
        key: "v_dc",
        unit: "V",
        kind: ValueKind::Number,
        fixture: false,
        doc: "common bus voltage (default: [droop] v_ref)",
    },
    KeySpec {
        section: "mpt",
        key: "i_drref",
        unit: "A",
        kind: ValueKind::Number,
        fixture: true,
        doc: "d-axis current reference; excludes p_grid",
    },
    KeySpec {
        section: "sweep",
        key: "p_grid_n",
        unit: "-",
        kind: ValueKind::Count,
        fixture: false,
        doc: "grid-power samples",
    },
    KeySpec {
        section: "sweep",
        key: "c_dc2_n",
        unit: "-",
        kind: ValueKind::Count,
        fixture: false,
        doc: "AEL capacitance samples",
    },
    KeySpec {
        section: "fleet",
        key: "ael_alpha",
        unit: "V/W",
        kind: ValueKind::List,
        fixture: true,
        doc: "per-unit AEL droops",
    },
    KeySpec {
        section: "fleet",
        key: "pemel_beta",
        unit: "V/W",
        kind: ValueKind::List,
        fixture: true,
        doc: "per-unit PEMEL resistive droops",
    },
    KeySpec {
        section: "fleet",
        key: "pemel_gamma",
        unit: "W*s/V",
        kind: ValueKind::List,
        fixture: true,
        doc: "per-unit PEMEL integral droops",
    },
    KeySpec {
        section: "fleet",
        key: "sc_zeta",
        unit: "W*s/V",
        kind: ValueKind::List,
        fixture: true,
        doc: "per-unit SC droops",
    },
    KeySpec {
        section: "fleet",
        key: "sc_k",
        unit: "1/s",
        kind: ValueKind::List,
        fixture: true,
        doc: "per-unit SC washout corners (must match)",
    },
    KeySpec {
        section: "fleet",
        key: "alpha_new",
        unit: "V/W",
        kind: ValueKind::Number,
        fixture: false,
        doc: "equivalent AEL droop after expansion",
    },
];

pub const SECTIONS: &[&str] = &[
    "droop", "inertia", "grid", "scenario", "mpt", "sweep", "design", "fleet",
];

/// All recognised keys in section order.
pub fn keys() -> Vec<KeySpec> {
    let mut all: Vec<KeySpec> = NUMERIC_KEYS.iter().chain(OTHER_KEYS).copied().collect();
    all.sort_by_key(|k| SECTIONS.iter().position(|s| *s == k.section));
    all
}

pub fn lookup(section: &str, key: &str) -> Option<KeySpec> {
    NUMERIC_KEYS
        .iter()
        .chain(OTHER_KEYS)
        .find(|k| k.section == section && k.key == key)
        .copied()
}

/// Key reference for `--help`.
pub fn key_help() -> String {
    let mut out =
        String::from("Config keys ([section] key [unit]; `fixture:` marks unpublished defaults):\n");
    let mut current = "";
    for k in keys() {
        if k.section != current {
            current = k.section;
            out.push_str(&format!("  [{current}]\n"));
        }
        let mark = if k.fixture { "fixture: " } else { "" };
        out.push_str(&format!("    {:<12} [{}] {}{}\n", k.key, k.unit, mark, k.doc));
    }
    out
}

/// Fully resolved configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigDocument {
    pub bank: DroopBank,
    pub inertia: InertiaParams,
    pub grid: GridModel,
    pub scenario: Scenario,
    pub mpt_fixture: MptFixture,
    pub circuit: MptCircuit,
    /// Operating point with `i_drref` already resolved.
    pub op: MptOperatingPoint,
    /// Grid power behind `i_drref`; `None` when `i_drref` was given directly.
    pub p_grid: Option<f64>,
    pub convention: PowerConvention,
    pub plane: PlaneSpec,
    pub design: DesignTargets,
    pub fleet: FleetSpec,
    pub alpha_new: Option<f64>,
    /// Line of every key that appeared, as `section.key`.
    pub lines: BTreeMap<String, usize>,
}

impl Default for ConfigDocument {
    fn default() -> Self {
        parse_config("").expect("built-in defaults are valid")
    }
}

impl ConfigDocument {
    pub fn location(&self, section: &str, key: &str) -> Location {
        self.lines
            .get(&format!("{section}.{key}"))
            .map_or(Location::Default, |&l| Location::Line(l))
    }
}

/// Balanced load for the default grid and inertia settings.
fn default_load(grid: &GridModel, inertia: &InertiaParams) -> f64 {
    grid.p_gen - inertia.p_ref
}

/// Fleet of 2 AEL, 3 PEMEL and 2 SC units whose equivalent is `bank`.
pub fn default_fleet(bank: &DroopBank) -> FleetSpec {
    FleetSpec {
        ael_alphas: vec![2.0 * bank.alpha; 2],
        pemel_betas: vec![3.0 * bank.beta; 3],
        pemel_gammas: vec![bank.gamma / 3.0; 3],
        sc_zetas: vec![bank.zeta / 2.0; 2],
        sc_ks: vec![bank.k; 2],
    }
}

/// Targets that reproduce `bank` when synthesized.
pub fn targets_for(bank: &DroopBank) -> DesignTargets {
    let ch = characteristic(bank);
    DesignTargets {
        tau: 1.0 / cutoff_from_omega0(ch.omega0, ch.xi),
        xi: ch.xi,
        k1: bank.alpha / bank.beta,
        k2: bank.zeta / bank.gamma,
        alpha: bank.alpha,
    }
}

struct Entry {
    section: String,
    key: String,
    value: String,
    line: usize,
}

fn strip_comment(line: &str) -> &str {
    let cut = line.find(['#', ';']).unwrap_or(line.len());
    line[..cut].trim()
}

fn lex(text: &str, issues: &mut Vec<ConfigIssue>) -> Vec<Entry> {
    let mut entries = Vec::new();
    // Outer `None`: before any header; inner `None`: inside a rejected header.
    let mut section: Option<Option<String>> = None;
    let mut seen_sections: BTreeMap<String, usize> = BTreeMap::new();
    let mut seen_keys: BTreeMap<(String, String), usize> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = strip_comment(raw);
        if body.is_empty() {
            continue;
        }
        if let Some(rest) = body.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                issues.push(issue(line, format!("malformed section header `{body}`")));
                section = Some(None);
                continue;
            };
            let name = name.trim().to_string();
            if !SECTIONS.contains(&name.as_str()) {
                issues.push(issue(line, format!("unknown section [{name}]")));
                section = Some(None);
                continue;
            }
            if let Some(&first) = seen_sections.get(&name) {
                issues.push(issue(
                    line,
                    format!("duplicate section [{name}] (first at line {first}, again at line {line})"),
                ));
            } else {
                seen_sections.insert(name.clone(), line);
            }
            section = Some(Some(name));
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            issues.push(issue(line, format!("expected `key = value`, found `{body}`")));
            continue;
        };
        let key = key.trim().to_string();
        let sec = match &section {
            None => {
                issues.push(issue(line, format!("key `{key}` outside any section")));
                continue;
            }
            Some(None) => continue,
            Some(Some(s)) => s.clone(),
        };
        if lookup(&sec, &key).is_none() {
            issues.push(issue(line, format!("unknown key `{key}` in [{sec}]")));
            continue;
        }
        if let Some(&first) = seen_keys.get(&(sec.clone(), key.clone())) {
            issues.push(issue(
                line,
                format!("duplicate key `{key}` in [{sec}] (first at line {first})"),
            ));
            continue;
        }
        seen_keys.insert((sec.clone(), key.clone()), line);
        entries.push(Entry {
            section: sec,
            key,
            value: value.trim().to_string(),
            line,
        });
    }
    entries
}

fn issue(line: usize, message: String) -> ConfigIssue {
    ConfigIssue {
        location: Location::Line(line),
        message,
    }
}

fn parse_number(text: &str) -> Option<f64> {
    text.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

fn parse_list(text: &str) -> std::result::Result<Vec<f64>, String> {
    text.split(',')
        .map(|item| parse_number(item).ok_or_else(|| format!("bad number `{}`", item.trim())))
        .collect()
}

fn parse_breakpoints(text: &str) -> std::result::Result<Vec<(f64, f64)>, String> {
    text.split(',')
        .map(|pair| {
            let (t, p) = pair
                .split_once(':')
                .ok_or_else(|| format!("expected `t:p`, found `{}`", pair.trim()))?;
            let t = parse_number(t).ok_or_else(|| format!("bad time `{}`", t.trim()))?;
            let p = parse_number(p).ok_or_else(|| format!("bad power `{}`", p.trim()))?;
            Ok((t, p))
        })
        .collect()
}

/// Config line for a domain error raised while validating `section`.
fn domain_issue(
    doc_lines: &BTreeMap<String, usize>,
    section: &str,
    context: &str,
    err: Error,
) -> ConfigIssue {
    let key = match &err {
        Error::InvalidParameter { name, .. } => Some(*name),
        _ => None,
    };
    let location = key
        .and_then(|k| doc_lines.get(&format!("{section}.{k}")))
        .or_else(|| doc_lines.get(&format!("[{section}]")))
        .map_or(Location::Default, |&l| Location::Line(l));
    ConfigIssue {
        location,
        message: format!("[{section}] {context}: {err}"),
    }
}

pub fn parse_config(text: &str) -> std::result::Result<ConfigDocument, ConfigErrors> {
    let mut issues = Vec::new();
    let entries = lex(text, &mut issues);
    let mut lines = BTreeMap::new();
    for e in &entries {
        lines.insert(format!("{}.{}", e.section, e.key), e.line);
    }
    for (idx, raw) in text.lines().enumerate() {
        let body = strip_comment(raw);
        if let Some(name) = body.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            lines.entry(format!("[{}]", name.trim())).or_insert(idx + 1);
        }
    }
    let find = |section: &str, key: &str| entries.iter().find(|e| e.section == section && e.key == key);

    let fixture = match find("mpt", "fixture") {
        None => MptFixture::Nominal,
        Some(e) => MptFixture::parse(&e.value).unwrap_or_else(|| {
            issues.push(issue(
                e.line,
                format!("unknown mpt fixture `{}` (expected nominal or boundary)", e.value),
            ));
            MptFixture::Nominal
        }),
    };

    let mut v = Values {
        bank: DroopBank::reference(),
        inertia: InertiaParams::reference(),
        grid: GridModel::fixture(),
        t_end: 20.0,
        dt: DEFAULT_DT,
        soc0: 0.5,
        e_rated: 3.6e6,
        circuit: fixture.circuit(),
        op: fixture.operating_point(),
        p_grid: fixture.p_grid(),
        dq_scale: PowerConvention::default().scale,
        plane: PlaneSpec::standard(100),
        design: DesignTargets {
            tau: 1.0,
            xi: 1.0,
            k1: 1.0,
            k2: 1.0,
            alpha: 1.0,
        },
    };
    let mut load = None;
    let mut fleet_lists: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    let mut optional: BTreeMap<&str, f64> = BTreeMap::new();

    // [design] defaults depend on the resolved bank, so apply droop first.
    let mut ordered: Vec<&Entry> = entries.iter().collect();
    ordered.sort_by_key(|e| (e.section != "droop", e.line));
    let mut design_set: Vec<(&str, f64)> = Vec::new();
    for e in ordered {
        let spec = lookup(&e.section, &e.key).expect("lexer filters unknown keys");
        match spec.kind {
            ValueKind::Number => {
                let Some(x) = parse_number(&e.value) else {
                    issues.push(issue(
                        e.line,
                        format!("bad number `{}` for `{}` [{}]", e.value, e.key, spec.unit),
                    ));
                    continue;
                };
                if e.section == "design" {
                    design_set.push((spec.key, x));
                } else if let Some(slot) = numeric_slot(&mut v, &e.section, &e.key) {
                    *slot = x;
                } else {
                    optional.insert(spec.key, x);
                }
            }
            ValueKind::Count => match e.value.trim().parse::<usize>() {
                Ok(n) if n >= 1 => {
                    if spec.key == "p_grid_n" {
                        v.plane.p_grid_n = n;
                    } else {
                        v.plane.c_dc2_n = n;
                    }
                }
                _ => issues.push(issue(
                    e.line,
                    format!("`{}` must be a positive integer, found `{}`", e.key, e.value),
                )),
            },
            ValueKind::Breakpoints => match parse_breakpoints(&e.value) {
                Ok(points) => match LoadProfile::new(points) {
                    Ok(p) => load = Some(p),
                    Err(err) => issues.push(issue(e.line, format!("load: {err}"))),
                },
                Err(msg) => issues.push(issue(e.line, format!("load: {msg}"))),
            },
            ValueKind::List => match parse_list(&e.value) {
                Ok(list) => {
                    fleet_lists.insert(spec.key, list);
                }
                Err(msg) => issues.push(issue(e.line, format!("{}: {msg}", e.key))),
            },
            ValueKind::Name => {}
        }
    }

    v.design = targets_for(&v.bank);
    for (key, x) in design_set {
        if let Some(slot) = numeric_slot(&mut v, "design", key) {
            *slot = x;
        }
    }

    let bank_ok = v.bank.validate().map_err(|err| {
        issues.push(domain_issue(
            &lines,
            "droop",
            "DroopBank requires positive gains",
            err,
        ));
    });
    if let Err(err) = v.inertia.validate() {
        issues.push(domain_issue(&lines, "inertia", "inertia emulation", err));
    }
    if let Err(err) = v.grid.validate() {
        issues.push(domain_issue(&lines, "grid", "grid model", err));
    }
    let load = load.unwrap_or_else(|| LoadProfile::constant(default_load(&v.grid, &v.inertia)));
    let scenario = Scenario {
        load,
        t_end: v.t_end,
        dt: v.dt,
        soc0: v.soc0,
        e_rated: v.e_rated,
    };
    if let Err(err) = scenario.validate() {
        issues.push(domain_issue(&lines, "scenario", "scenario", err));
    }

    v.op.d_vi = optional.get("d_vi").copied().unwrap_or(v.inertia.d);
    v.op.v_dc = optional.get("v_dc").copied().unwrap_or(v.bank.v_ref);
    let convention = PowerConvention { scale: v.dq_scale };
    if convention.scale <= 0.0 {
        issues.push(domain_issue(
            &lines,
            "mpt",
            "power convention",
            Error::InvalidParameter {
                name: "dq_scale",
                value: convention.scale,
                reason: "must be finite and > 0",
            },
        ));
    }
    let p_grid = match (optional.get("i_drref"), lines.get("mpt.p_grid")) {
        (Some(_), Some(&p_line)) => {
            issues.push(issue(
                p_line,
                format!(
                    "`p_grid` and `i_drref` are mutually exclusive (i_drref at line {})",
                    lines["mpt.i_drref"]
                ),
            ));
            None
        }
        (Some(&i), None) => {
            v.op.i_drref = i;
            None
        }
        (None, _) => {
            v.op.i_drref = convention.current(v.p_grid, v.op.v_gdr);
            Some(v.p_grid)
        }
    };
    if let Err(err) = v.circuit.validate() {
        issues.push(domain_issue(&lines, "mpt", "circuit", err));
    }
    if let Err(err) = v.op.validate() {
        issues.push(domain_issue(&lines, "mpt", "operating point", err));
    }
    if let Err(err) = v.plane.validate() {
        let mut i = domain_issue(&lines, "sweep", "plane", err);
        if i.location == Location::Default {
            if let Some(&l) = lines.get("[sweep]") {
                i.location = Location::Line(l);
            }
        }
        issues.push(i);
    }

    let base_fleet = if bank_ok.is_ok() {
        default_fleet(&v.bank)
    } else {
        default_fleet(&DroopBank::reference())
    };
    let take =
        |key: &str, fallback: &Vec<f64>| fleet_lists.get(key).cloned().unwrap_or_else(|| fallback.clone());
    let fleet = FleetSpec {
        ael_alphas: take("ael_alpha", &base_fleet.ael_alphas),
        pemel_betas: take("pemel_beta", &base_fleet.pemel_betas),
        pemel_gammas: take("pemel_gamma", &base_fleet.pemel_gammas),
        sc_zetas: take("sc_zeta", &base_fleet.sc_zetas),
        sc_ks: take("sc_k", &base_fleet.sc_ks),
    };
    if let Err(err) = fleet.validate() {
        issues.push(domain_issue(&lines, "fleet", "fleet", err));
    }
    let alpha_new = optional.get("alpha_new").copied();
    if let Some(a) = alpha_new {
        if a.is_nan() || a <= 0.0 {
            issues.push(issue(
                lines["fleet.alpha_new"],
                format!("alpha_new = {a}: must be > 0"),
            ));
        }
    }

    if !issues.is_empty() {
        issues.sort_by_key(|i| match i.location {
            Location::Line(l) => l,
            _ => usize::MAX,
        });
        return Err(ConfigErrors(issues));
    }
    Ok(ConfigDocument {
        bank: v.bank,
        inertia: v.inertia,
        grid: v.grid,
        scenario,
        mpt_fixture: fixture,
        circuit: v.circuit,
        op: v.op,
        p_grid,
        convention,
        plane: v.plane,
        design: v.design,
        fleet,
        alpha_new,
        lines,
    })
}
