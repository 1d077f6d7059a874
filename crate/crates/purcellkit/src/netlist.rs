//! Circuit data model and the line-oriented netlist text format.
//!
//! One element per line, `<ID> <nodes...> <params>`; the element kind is
//! inferred from the leading letter of the id. `*` or `;` begins a comment.
//! Node names are arbitrary identifiers; `0` is reserved for ground.
//!
//! ```text
//! * optional title line
//! R1 1 0 50
//! L1 1 2 2n
//! C1 2 0 0.2548p
//! K1 L1 L2 0.0854            ; coupling coefficient, not mutual inductance
//! J1 2 3 4.04m               ; ideal admittance inverter, J in siemens
//! T1 3 0 4 0 Z0=50 LEN=8.58m EEFF=6.225
//! T2 4 0 5 0 Z0=50 FQ=7G DEG=180
//! P1 5 0 PORT Z0=50
//! ```
//!
//! Values accept the SI suffixes from [`crate::si`]. Mutual inductance is
//! always expressed as a dimensionless coefficient `k`; the solver forms
//! M = k sqrt(L_i L_j) when it assembles the admittance system.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::si;

pub const GROUND: &str = "0";

/// How a transmission line's electrical length is specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LineLength {
    /// Physical length in meters plus effective permittivity.
    Physical { meters: f64, eps_eff: f64 },
    /// Electrical length in degrees at a reference frequency.
    Electrical { ref_hz: f64, degrees: f64 },
}

impl LineLength {
    /// Electrical length theta in radians at frequency `f_hz`.
    pub fn theta(&self, f_hz: f64) -> f64 {
        match *self {
            LineLength::Physical { meters, eps_eff } => {
                2.0 * std::f64::consts::PI * f_hz * eps_eff.sqrt() * meters
                    / crate::SPEED_OF_LIGHT
            }
            LineLength::Electrical { ref_hz, degrees } => {
                degrees.to_radians() * f_hz / ref_hz
            }
        }
    }
}

/// One circuit element. Two-terminal elements store `(n1, n2)`;
/// transmission lines store both port node pairs; mutual couplings
/// reference the two inductors by id.
#[derive(Debug, Clone, PartialEq)]
pub enum Element {
    Resistor { id: String, n1: String, n2: String, ohms: f64 },
    Inductor { id: String, n1: String, n2: String, henries: f64 },
    Capacitor { id: String, n1: String, n2: String, farads: f64 },
    MutualCoupling { id: String, inductor_a: String, inductor_b: String, coefficient: f64 },
    TransmissionLine {
        id: String,
        p1: (String, String),
        p2: (String, String),
        z0: f64,
        length: LineLength,
    },
    Port { id: String, n1: String, n2: String, z0: f64, index: usize },
    AdmittanceInverter { id: String, n1: String, n2: String, siemens: f64 },
}

impl Element {
    pub fn id(&self) -> &str {
        match self {
            Element::Resistor { id, .. }
            | Element::Inductor { id, .. }
            | Element::Capacitor { id, .. }
            | Element::MutualCoupling { id, .. }
            | Element::TransmissionLine { id, .. }
            | Element::Port { id, .. }
            | Element::AdmittanceInverter { id, .. } => id,
        }
    }

    /// Kind letter used in the grammar.
    pub fn kind_letter(&self) -> char {
        match self {
            Element::Resistor { .. } => 'R',
            Element::Inductor { .. } => 'L',
            Element::Capacitor { .. } => 'C',
            Element::MutualCoupling { .. } => 'K',
            Element::TransmissionLine { .. } => 'T',
            Element::Port { .. } => 'P',
            Element::AdmittanceInverter { .. } => 'J',
        }
    }

    /// Node names this element touches (empty for mutual couplings).
    pub fn nodes(&self) -> Vec<&str> {
        match self {
            Element::Resistor { n1, n2, .. }
            | Element::Inductor { n1, n2, .. }
            | Element::Capacitor { n1, n2, .. }
            | Element::Port { n1, n2, .. }
            | Element::AdmittanceInverter { n1, n2, .. } => vec![n1, n2],
            Element::TransmissionLine { p1, p2, .. } => {
                vec![&p1.0, &p1.1, &p2.0, &p2.1]
            }
            Element::MutualCoupling { .. } => Vec::new(),
        }
    }
}

/// An ordered element list over named nodes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Netlist {
    pub title: String,
    pub elements: Vec<Element>,
}

impl Netlist {
    pub fn new(title: impl Into<String>) -> Self {
        Self { title: title.into(), elements: Vec::new() }
    }

    pub fn push(&mut self, element: Element) {
        self.elements.push(element);
    }

    /// All node names in first-appearance order, ground included if present.
    pub fn node_names(&self) -> Vec<String> {
        let mut seen = HashSet::new();
        let mut names = Vec::new();
        for el in &self.elements {
            for n in el.nodes() {
                if seen.insert(n.to_string()) {
                    names.push(n.to_string());
                }
            }
        }
        names
    }

    /// Ports sorted by port index.
    pub fn ports(&self) -> Vec<&Element> {
        let mut ports: Vec<&Element> = self
            .elements
            .iter()
            .filter(|e| matches!(e, Element::Port { .. }))
            .collect();
        ports.sort_by_key(|e| match e {
            Element::Port { index, .. } => *index,
            _ => unreachable!(),
        });
        ports
    }

    pub fn port_count(&self) -> usize {
        self.ports().len()
    }

    /// Look up an inductor element by id.
    pub fn inductor(&self, id: &str) -> Option<(&str, &str, f64)> {
        self.elements.iter().find_map(|e| match e {
            Element::Inductor { id: lid, n1, n2, henries } if lid == id => {
                Some((n1.as_str(), n2.as_str(), *henries))
            }
            _ => None,
        })
    }
}

/// Parse netlist text. Comments and blank lines are ignored; a leading
/// comment line becomes the title. The returned netlist has been validated.
pub fn parse_netlist(text: &str) -> Result<Netlist> {
    let mut netlist = Netlist::default();
    let mut title_taken = false;
    let mut seen_ids: HashSet<String> = HashSet::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let body = strip_comment(raw);
        if body.trim().is_empty() {
            if !title_taken {
                if let Some(title) = comment_text(raw) {
                    netlist.title = title;
                    title_taken = true;
                }
            }
            continue;
        }
        title_taken = true;
        let element = parse_element(body.trim(), line_no)?;
        let key = format!("{}:{}", element.kind_letter(), element.id());
        if !seen_ids.insert(key) {
            return Err(Error::Parse {
                line: line_no,
                message: format!("duplicate id '{}'", element.id()),
            });
        }
        netlist.push(element);
    }

    let diagnostics = validate_netlist(&netlist);
    if let Some(first) = diagnostics.first() {
        return Err(Error::Invalid(format!(
            "netlist invalid: {first}{}",
            if diagnostics.len() > 1 {
                format!(" (+{} more)", diagnostics.len() - 1)
            } else {
                String::new()
            }
        )));
    }
    Ok(netlist)
}

fn strip_comment(line: &str) -> &str {
    match line.find(|c| c == '*' || c == ';') {
        Some(pos) => &line[..pos],
        None => line,
    }
}

/// Text of a full-line comment, if the line is one.
fn comment_text(line: &str) -> Option<String> {
    let trimmed = line.trim_start();
    trimmed
        .strip_prefix('*')
        .or_else(|| trimmed.strip_prefix(';'))
        .map(|rest| rest.trim().to_string())
}

fn parse_element(body: &str, line: usize) -> Result<Element> {
    let err = |message: String| Error::Parse { line, message };
    let tokens: Vec<&str> = body.split_whitespace().collect();
    let id = tokens[0].to_string();
    let kind = id.chars().next().unwrap().to_ascii_uppercase();
    let value = |tok: &str| si::parse(tok).map_err(|m| err(m));

    let two_terminal = |expect: usize| -> Result<()> {
        if tokens.len() != expect {
            Err(err(format!(
                "expected {} fields for element '{}', got {}",
                expect,
                id,
                tokens.len()
            )))
        } else {
            Ok(())
        }
    };

    match kind {
        'R' => {
            two_terminal(4)?;
            Ok(Element::Resistor {
                id,
                n1: tokens[1].into(),
                n2: tokens[2].into(),
                ohms: value(tokens[3])?,
            })
        }
        'L' => {
            two_terminal(4)?;
            Ok(Element::Inductor {
                id,
                n1: tokens[1].into(),
                n2: tokens[2].into(),
                henries: value(tokens[3])?,
            })
        }
        'C' => {
            two_terminal(4)?;
            Ok(Element::Capacitor {
                id,
                n1: tokens[1].into(),
                n2: tokens[2].into(),
                farads: value(tokens[3])?,
            })
        }
        'J' => {
            two_terminal(4)?;
            Ok(Element::AdmittanceInverter {
                id,
                n1: tokens[1].into(),
                n2: tokens[2].into(),
                siemens: value(tokens[3])?,
            })
        }
        'K' => {
            two_terminal(4)?;
            Ok(Element::MutualCoupling {
                id,
                inductor_a: tokens[1].into(),
                inductor_b: tokens[2].into(),
                coefficient: value(tokens[3])?,
            })
        }
        'P' => {
            if tokens.len() != 5 || !tokens[3].eq_ignore_ascii_case("PORT") {
                return Err(err(format!(
                    "port syntax is '{id} <n+> <n-> PORT Z0=<ohms>'"
                )));
            }
            let z0 = keyed_value(tokens[4], "Z0").map_err(|m| err(m))?;
            let index = port_index(&id)
                .ok_or_else(|| err(format!("port id '{id}' must end in its port number")))?;
            Ok(Element::Port {
                id,
                n1: tokens[1].into(),
                n2: tokens[2].into(),
                z0,
                index,
            })
        }
        'T' => {
            if tokens.len() != 8 {
                return Err(err(format!(
                    "line syntax is '{id} <a+> <a-> <b+> <b-> Z0=.. (LEN=.. EEFF=.. | FQ=.. DEG=..)'"
                )));
            }
            let z0 = keyed_value(tokens[5], "Z0").map_err(|m| err(m))?;
            let (k6, v6) = split_key(tokens[6]).map_err(|m| err(m))?;
            let (k7, v7) = split_key(tokens[7]).map_err(|m| err(m))?;
            let length = match (k6.as_str(), k7.as_str()) {
                ("LEN", "EEFF") => LineLength::Physical { meters: v6, eps_eff: v7 },
                ("FQ", "DEG") => LineLength::Electrical { ref_hz: v6, degrees: v7 },
                _ => {
                    return Err(err(format!(
                        "line '{id}' needs LEN=/EEFF= or FQ=/DEG= parameters"
                    )))
                }
            };
            Ok(Element::TransmissionLine {
                id,
                p1: (tokens[1].into(), tokens[2].into()),
                p2: (tokens[3].into(), tokens[4].into()),
                z0,
                length,
            })
        }
        other => Err(err(format!("unknown element kind '{other}'"))),
    }
}

fn split_key(token: &str) -> std::result::Result<(String, f64), String> {
    let (key, val) = token
        .split_once('=')
        .ok_or_else(|| format!("expected KEY=value, got '{token}'"))?;
    Ok((key.to_ascii_uppercase(), si::parse(val)?))
}

fn keyed_value(token: &str, expect: &str) -> std::result::Result<f64, String> {
    let (key, val) = split_key(token)?;
    if key != expect {
        return Err(format!("expected {expect}=value, got '{token}'"));
    }
    Ok(val)
}

fn port_index(id: &str) -> Option<usize> {
    let digits: String = id.chars().rev().take_while(|c| c.is_ascii_digit()).collect();
    let digits: String = digits.chars().rev().collect();
    digits.parse().ok()
}

/// Check every structural invariant; returns one diagnostic per violation.
/// An empty list means the netlist is valid.
pub fn validate_netlist(netlist: &Netlist) -> Vec<String> {
    let mut diags = Vec::new();

    let mut inductors: HashMap<&str, f64> = HashMap::new();
    for el in &netlist.elements {
        if let Element::Inductor { id, henries, .. } = el {
            inductors.insert(id, *henries);
        }
    }

    let positive = |diags: &mut Vec<String>, id: &str, what: &str, v: f64| {
        if !(v.is_finite() && v > 0.0) {
            diags.push(format!("{id}: {what} must be positive and finite, got {v}"));
        }
    };

    let mut port_indices: Vec<usize> = Vec::new();
    for el in &netlist.elements {
        match el {
            Element::Resistor { id, ohms, .. } => positive(&mut diags, id, "resistance", *ohms),
            Element::Inductor { id, henries, .. } => {
                positive(&mut diags, id, "inductance", *henries)
            }
            Element::Capacitor { id, farads, .. } => {
                positive(&mut diags, id, "capacitance", *farads)
            }
            Element::AdmittanceInverter { id, siemens, .. } => {
                positive(&mut diags, id, "inverter admittance", *siemens)
            }
            Element::TransmissionLine { id, z0, length, .. } => {
                positive(&mut diags, id, "characteristic impedance", *z0);
                match *length {
                    LineLength::Physical { meters, eps_eff } => {
                        positive(&mut diags, id, "length", meters);
                        positive(&mut diags, id, "effective permittivity", eps_eff);
                    }
                    LineLength::Electrical { ref_hz, degrees } => {
                        positive(&mut diags, id, "reference frequency", ref_hz);
                        positive(&mut diags, id, "electrical length", degrees);
                    }
                }
            }
            Element::Port { id, z0, .. } => {
                positive(&mut diags, id, "reference impedance", *z0);
                if let Element::Port { index, .. } = el {
                    port_indices.push(*index);
                }
                let _ = id;
            }
            Element::MutualCoupling { id, inductor_a, inductor_b, coefficient } => {
                for lref in [inductor_a, inductor_b] {
                    if !inductors.contains_key(lref.as_str()) {
                        diags.push(format!("{id}: references unknown inductor '{lref}'"));
                    }
                }
                if inductor_a == inductor_b {
                    diags.push(format!("{id}: couples inductor '{inductor_a}' to itself"));
                }
                if !(coefficient.is_finite() && *coefficient > 0.0 && *coefficient < 1.0) {
                    diags.push(format!("{id}: coupling coefficient out of range (0,1)"));
                }
            }
        }
    }

    // port index contract: 1..P, contiguous, unique
    if port_indices.is_empty() {
        diags.push("no ports defined".into());
    } else {
        let mut sorted = port_indices.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != port_indices.len() {
            diags.push("duplicate port indices".into());
        } else if sorted[0] != 1 || *sorted.last().unwrap() != sorted.len() {
            diags.push(format!(
                "port indices must be 1..{} contiguous, got {sorted:?}",
                sorted.len()
            ));
        }
    }

    // ground must exist, and every node must reach it through elements
    let nodes = netlist.node_names();
    if !nodes.iter().any(|n| n == GROUND) {
        diags.push("missing ground node '0'".into());
    } else {
        let unreachable = unreachable_nodes(netlist);
        for node in unreachable {
            diags.push(format!("node {node} unreachable from ground"));
        }
    }

    // coupled-inductor groups must form a realizable (positive definite)
    // inductance matrix; pairwise k < 1 alone does not guarantee it
    for group in coupling_groups(netlist) {
        if group.inductor_ids.len() > 2 && !group.is_realizable() {
            diags.push(format!(
                "coupling group {{{}}} has a non positive definite inductance matrix",
                group.inductor_ids.join(", ")
            ));
        }
    }

    diags
}

fn unreachable_nodes(netlist: &Netlist) -> Vec<String> {
    let names = netlist.node_names();
    let index: HashMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); names.len()];
    let add_edge = |adjacency: &mut Vec<Vec<usize>>, a: &str, b: &str| {
        let (ia, ib) = (index[a], index[b]);
        adjacency[ia].push(ib);
        adjacency[ib].push(ia);
    };
    for el in &netlist.elements {
        // all elements couple their terminals for reachability purposes;
        // a transmission line links both of its port pairs
        let ns = el.nodes();
        for i in 0..ns.len() {
            for j in i + 1..ns.len() {
                add_edge(&mut adjacency, ns[i], ns[j]);
            }
        }
    }
    // mutual couplings bridge the two inductors' nodes
    for el in &netlist.elements {
        if let Element::MutualCoupling { inductor_a, inductor_b, .. } = el {
            if let (Some(a), Some(b)) = (netlist.inductor(inductor_a), netlist.inductor(inductor_b))
            {
                add_edge(&mut adjacency, a.0, b.0);
            }
        }
    }

    let Some(&ground) = index.get(GROUND) else {
        return names;
    };
    let mut visited = vec![false; names.len()];
    let mut stack = vec![ground];
    while let Some(node) = stack.pop() {
        if std::mem::replace(&mut visited[node], true) {
            continue;
        }
        for &n in &adjacency[node] {
            if !visited[n] {
                stack.push(n);
            }
        }
    }
    names
        .into_iter()
        .enumerate()
        .filter_map(|(i, n)| (!visited[i]).then_some(n))
        .collect()
}

/// A connected group of inductors linked by mutual couplings.
pub(crate) struct CouplingGroup {
    pub inductor_ids: Vec<String>,
    /// Symmetric inductance matrix with mutuals M = k sqrt(Li Lj).
    pub l_matrix: Vec<Vec<f64>>,
}

impl CouplingGroup {
    /// Cholesky test for positive definiteness.
    pub fn is_realizable(&self) -> bool {
        let n = self.l_matrix.len();
        let mut chol = vec![vec![0.0_f64; n]; n];
        for i in 0..n {
            for j in 0..=i {
                let mut sum = self.l_matrix[i][j];
                for k in 0..j {
                    sum -= chol[i][k] * chol[j][k];
                }
                if i == j {
                    if sum <= 0.0 {
                        return false;
                    }
                    chol[i][j] = sum.sqrt();
                } else {
                    chol[i][j] = sum / chol[j][j];
                }
            }
        }
        true
    }
}

/// Group inductors connected through K elements; uncoupled inductors are
/// not included. Order is deterministic (element order).
pub(crate) fn coupling_groups(netlist: &Netlist) -> Vec<CouplingGroup> {
    let mut inductor_order: Vec<&str> = Vec::new();
    let mut values: BTreeMap<&str, f64> = BTreeMap::new();
    for el in &netlist.elements {
        if let Element::Inductor { id, henries, .. } = el {
            inductor_order.push(id);
            values.insert(id, *henries);
        }
    }
    let mut parent: HashMap<&str, &str> = inductor_order.iter().map(|&i| (i, i)).collect();
    fn find<'a>(parent: &mut HashMap<&'a str, &'a str>, x: &'a str) -> &'a str {
        let mut root = x;
        while parent[root] != root {
            root = parent[root];
        }
        let mut cur = x;
        while parent[cur] != root {
            let next = parent[cur];
            parent.insert(cur, root);
            cur = next;
        }
        root
    }
    let mut couplings: Vec<(&str, &str, f64)> = Vec::new();
    for el in &netlist.elements {
        if let Element::MutualCoupling { inductor_a, inductor_b, coefficient, .. } = el {
            if values.contains_key(inductor_a.as_str()) && values.contains_key(inductor_b.as_str())
            {
                couplings.push((inductor_a, inductor_b, *coefficient));
                let ra = find(&mut parent, inductor_a);
                let rb = find(&mut parent, inductor_b);
                if ra != rb {
                    parent.insert(ra, rb);
                }
            }
        }
    }

    let mut groups: Vec<(Vec<&str>, &str)> = Vec::new();
    let mut root_of: HashMap<&str, usize> = HashMap::new();
    for &id in &inductor_order {
        let root = find(&mut parent, id);
        if root == id && !couplings.iter().any(|(a, b, _)| *a == id || *b == id) {
            continue; // uncoupled inductor, handled as a plain branch
        }
        let slot = *root_of.entry(root).or_insert_with(|| {
            groups.push((Vec::new(), root));
            groups.len() - 1
        });
        groups[slot].0.push(id);
    }
    // drop singleton "groups" (roots that never appear in a coupling)
    groups.retain(|(members, _)| members.len() >= 2);

    groups
        .into_iter()
        .map(|(members, _)| {
            let n = members.len();
            let mut m = vec![vec![0.0; n]; n];
            for (i, id) in members.iter().enumerate() {
                m[i][i] = values[id];
            }
            for (a, b, k) in &couplings {
                let (Some(i), Some(j)) = (
                    members.iter().position(|id| id == a),
                    members.iter().position(|id| id == b),
                ) else {
                    continue;
                };
                let mutual = k * (values[a] * values[b]).sqrt();
                m[i][j] = mutual;
                m[j][i] = mutual;
            }
            CouplingGroup {
                inductor_ids: members.iter().map(|s| s.to_string()).collect(),
                l_matrix: m,
            }
        })
        .collect()
}

/// Canonical text form. `parse_netlist(serialize_netlist(n))` reproduces the
/// element sequence exactly; values are printed with Rust's shortest
/// round-trip float formatting, so numeric fields survive bit-exactly.
pub fn serialize_netlist(netlist: &Netlist) -> String {
    let mut out = String::new();
    if !netlist.title.is_empty() {
        let _ = writeln!(out, "* {}", netlist.title);
    }
    for el in &netlist.elements {
        match el {
            Element::Resistor { id, n1, n2, ohms } => {
                let _ = writeln!(out, "{id} {n1} {n2} {ohms}");
            }
            Element::Inductor { id, n1, n2, henries } => {
                let _ = writeln!(out, "{id} {n1} {n2} {henries}");
            }
            Element::Capacitor { id, n1, n2, farads } => {
                let _ = writeln!(out, "{id} {n1} {n2} {farads}");
            }
            Element::MutualCoupling { id, inductor_a, inductor_b, coefficient } => {
                let _ = writeln!(out, "{id} {inductor_a} {inductor_b} {coefficient}");
            }
            Element::AdmittanceInverter { id, n1, n2, siemens } => {
                let _ = writeln!(out, "{id} {n1} {n2} {siemens}");
            }
            Element::Port { id, n1, n2, z0, .. } => {
                let _ = writeln!(out, "{id} {n1} {n2} PORT Z0={z0}");
            }
            Element::TransmissionLine { id, p1, p2, z0, length } => match length {
                LineLength::Physical { meters, eps_eff } => {
                    let _ = writeln!(
                        out,
                        "{id} {} {} {} {} Z0={z0} LEN={meters} EEFF={eps_eff}",
                        p1.0, p1.1, p2.0, p2.1
                    );
                }
                LineLength::Electrical { ref_hz, degrees } => {
                    let _ = writeln!(
                        out,
                        "{id} {} {} {} {} Z0={z0} FQ={ref_hz} DEG={degrees}",
                        p1.0, p1.1, p2.0, p2.1
                    );
                }
            },
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_port_capacitor_pair() {
        let n = parse_netlist("P1 1 0 PORT Z0=50\nC1 1 2 30f\nP2 2 0 PORT Z0=50").unwrap();
        assert_eq!(n.port_count(), 2);
        assert_eq!(n.elements.len(), 3);
        match &n.elements[1] {
            Element::Capacitor { farads, .. } => assert_eq!(*farads, 30e-15),
            other => panic!("expected capacitor, got {other:?}"),
        }
    }

    #[test]
    fn parses_mutual_coupling() {
        let text = "P1 1 0 PORT Z0=50\nL1 1 0 2n\nL2 2 0 2n\nR1 2 0 50\nK1 L1 L2 0.0854";
        let n = parse_netlist(text).unwrap();
        match n.elements.last().unwrap() {
            Element::MutualCoupling { coefficient, .. } => assert_eq!(*coefficient, 0.0854),
            other => panic!("expected coupling, got {other:?}"),
        }
    }

    #[test]
    fn unknown_kind_reports_line() {
        let err = parse_netlist("X1 1 0 5").unwrap_err().to_string();
        assert!(err.contains("unknown element kind 'X'"), "{err}");
        assert!(err.contains("line 1"), "{err}");
    }

    #[test]
    fn duplicate_id_rejected() {
        let err = parse_netlist("L1 1 0 2n\nL1 2 0 3n").unwrap_err().to_string();
        assert!(err.contains("duplicate id 'L1'"), "{err}");
    }

    #[test]
    fn dangling_coupling_rejected() {
        let err = parse_netlist("P1 1 0 PORT Z0=50\nL1 1 0 2n\nK1 L1 L9 0.1")
            .unwrap_err()
            .to_string();
        assert!(err.contains("unknown inductor 'L9'"), "{err}");
    }

    #[test]
    fn missing_ground_rejected() {
        let err = parse_netlist("P1 1 2 PORT Z0=50\nR1 1 2 50").unwrap_err().to_string();
        assert!(err.contains("missing ground"), "{err}");
    }

    #[test]
    fn coupling_coefficient_range_diagnostic() {
        let mut n = Netlist::new("");
        n.push(Element::Port { id: "P1".into(), n1: "1".into(), n2: GROUND.into(), z0: 50.0, index: 1 });
        n.push(Element::Inductor { id: "L1".into(), n1: "1".into(), n2: GROUND.into(), henries: 2e-9 });
        n.push(Element::Inductor { id: "L2".into(), n1: "1".into(), n2: GROUND.into(), henries: 2e-9 });
        n.push(Element::MutualCoupling {
            id: "K1".into(),
            inductor_a: "L1".into(),
            inductor_b: "L2".into(),
            coefficient: 1.2,
        });
        let diags = validate_netlist(&n);
        assert!(
            diags.iter().any(|d| d.contains("K1") && d.contains("out of range")),
            "{diags:?}"
        );
    }

    #[test]
    fn unreachable_node_diagnostic() {
        let mut n = Netlist::new("");
        n.push(Element::Port { id: "P1".into(), n1: "1".into(), n2: GROUND.into(), z0: 50.0, index: 1 });
        n.push(Element::Resistor { id: "R1".into(), n1: "7".into(), n2: "7".into(), ohms: 50.0 });
        let diags = validate_netlist(&n);
        assert!(
            diags.iter().any(|d| d.contains("node 7 unreachable from ground")),
            "{diags:?}"
        );
    }

    #[test]
    fn chained_overcoupling_detected() {
        // pairwise k < 1 but the 3x3 inductance matrix is indefinite
        let text = "P1 1 0 PORT Z0=50\nL1 1 0 2n\nL2 1 0 2n\nL3 1 0 2n\n\
                    K1 L1 L2 0.99\nK2 L2 L3 0.99";
        let err = parse_netlist(text).unwrap_err().to_string();
        assert!(err.contains("positive definite"), "{err}");
    }

    #[test]
    fn roundtrip_preserves_elements() {
        let text = "* demo\nP1 in 0 PORT Z0=50\nR1 in mid 12.5\nL1 mid 0 2e-9\n\
                    C1 mid 0 2.548e-13\nJ1 mid out 0.004036783\n\
                    T1 out 0 far 0 Z0=75 FQ=7000000000 DEG=180\nP2 far 0 PORT Z0=50";
        let parsed = parse_netlist(text).unwrap();
        let serialized = serialize_netlist(&parsed);
        let reparsed = parse_netlist(&serialized).unwrap();
        assert_eq!(parsed, reparsed);
    }

    #[test]
    fn serializes_resistor_plainly() {
        let mut n = Netlist::new("");
        n.push(Element::Resistor { id: "R1".into(), n1: "1".into(), n2: GROUND.into(), ohms: 50.0 });
        n.push(Element::Port { id: "P1".into(), n1: "1".into(), n2: GROUND.into(), z0: 50.0, index: 1 });
        let text = serialize_netlist(&n);
        assert!(text.starts_with("R1 1 0 50\n"), "{text}");
        assert!(text.contains("P1 1 0 PORT Z0=50"), "{text}");
    }

    #[test]
    fn electrical_length_theta() {
        let line = LineLength::Electrical { ref_hz: 7e9, degrees: 180.0 };
        assert!((line.theta(7e9) - std::f64::consts::PI).abs() < 1e-12);
        assert!((line.theta(3.5e9) - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        let phys = LineLength::Physical { meters: 8.58268e-3, eps_eff: 6.225 };
        // half wave at 7 GHz for eps_eff = 6.225
        assert!((phys.theta(7e9) - std::f64::consts::PI).abs() < 1e-4);
    }
}
