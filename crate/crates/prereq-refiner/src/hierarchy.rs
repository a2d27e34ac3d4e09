//! Skills and the expert's initial prerequisite hierarchy.
//!
//! A hierarchy is a DAG over named skills. Edge order is insertion order and
//! stays stable so that every downstream matrix (deltas, fuzzy scores) has a
//! deterministic column layout.

use std::collections::HashMap;
use std::fmt;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Skill {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl Skill {
    pub fn new(id: impl Into<String>) -> Self {
        Skill {
            id: id.into(),
            label: None,
        }
    }

    pub fn with_label(id: impl Into<String>, label: impl Into<String>) -> Self {
        Skill {
            id: id.into(),
            label: Some(label.into()),
        }
    }
}

/// A directed prerequisite link: `from` must be mastered before `to`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub from: String,
    pub to: String,
}

impl Edge {
    pub fn new(from: impl Into<String>, to: impl Into<String>) -> Self {
        Edge {
            from: from.into(),
            to: to.into(),
        }
    }

    pub fn reversed(&self) -> Edge {
        Edge {
            from: self.to.clone(),
            to: self.from.clone(),
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\u{2192}{}", self.from, self.to)
    }
}

#[derive(Debug, Deserialize)]
struct HierarchyFile {
    skills: Vec<Skill>,
    edges: Vec<Edge>,
}

/// Validated prerequisite hierarchy. Immutable after construction.
#[derive(Debug, Clone)]
pub struct Hierarchy {
    skills: Vec<Skill>,
    edges: Vec<Edge>,
    index: HashMap<String, usize>,
}

impl Hierarchy {
    /// Builds a hierarchy, rejecting duplicate skill ids, unknown endpoints,
    /// self-loops, duplicate edges and directed cycles.
    pub fn new(skills: Vec<Skill>, edges: Vec<Edge>) -> Result<Self> {
        let mut index = HashMap::with_capacity(skills.len());
        for (i, skill) in skills.iter().enumerate() {
            if skill.id.is_empty() {
                return Err(Error::DuplicateSkill(String::new()));
            }
            if index.insert(skill.id.clone(), i).is_some() {
                return Err(Error::DuplicateSkill(skill.id.clone()));
            }
        }

        let mut seen = std::collections::HashSet::with_capacity(edges.len());
        let mut indexed = Vec::with_capacity(edges.len());
        for edge in &edges {
            let from = *index
                .get(&edge.from)
                .ok_or_else(|| Error::UnknownEndpoint {
                    from: edge.from.clone(),
                    to: edge.to.clone(),
                    unknown: edge.from.clone(),
                })?;
            let to = *index.get(&edge.to).ok_or_else(|| Error::UnknownEndpoint {
                from: edge.from.clone(),
                to: edge.to.clone(),
                unknown: edge.to.clone(),
            })?;
            if from == to {
                return Err(Error::SelfLoop(edge.from.clone()));
            }
            if !seen.insert((from, to)) {
                return Err(Error::DuplicateEdge {
                    from: edge.from.clone(),
                    to: edge.to.clone(),
                });
            }
            indexed.push((from, to));
        }

        if let Some(cycle) = find_cycles(skills.len(), &indexed).into_iter().next() {
            return Err(Error::CycleDetected {
                cycle: cycle.into_iter().map(|i| skills[i].id.clone()).collect(),
            });
        }

        Ok(Hierarchy {
            skills,
            edges,
            index,
        })
    }

    pub fn skills(&self) -> &[Skill] {
        &self.skills
    }

    pub fn skill_ids(&self) -> impl Iterator<Item = &str> {
        self.skills.iter().map(|s| s.id.as_str())
    }

    /// Edges in construction order. Determines the column order of every
    /// downstream matrix.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn skill_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// 0/1 adjacency matrix indexed by skill order: `m[i][j] == 1` iff the
    /// skill at position `i` is a prerequisite of the skill at position `j`.
    pub fn to_matrix(&self) -> Vec<Vec<u8>> {
        let n = self.skills.len();
        let mut m = vec![vec![0u8; n]; n];
        for edge in &self.edges {
            let i = self.index[&edge.from];
            let j = self.index[&edge.to];
            m[i][j] = 1;
        }
        m
    }

    /// Edges as (from, to) skill indices, in edge order.
    pub fn indexed_edges(&self) -> Vec<(usize, usize)> {
        self.edges
            .iter()
            .map(|e| (self.index[&e.from], self.index[&e.to]))
            .collect()
    }

    /// Skill indices in a topological order of the prerequisite DAG.
    pub fn topological_order(&self) -> Vec<usize> {
        let n = self.skills.len();
        let mut indegree = vec![0usize; n];
        let mut out = vec![Vec::new(); n];
        for (i, j) in self.indexed_edges() {
            indegree[j] += 1;
            out[i].push(j);
        }
        let mut queue: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        let mut head = 0;
        while head < queue.len() {
            let u = queue[head];
            head += 1;
            order.push(u);
            for &v in &out[u] {
                indegree[v] -= 1;
                if indegree[v] == 0 {
                    queue.push(v);
                }
            }
        }
        order
    }

    /// Reads the JSON form: `{"skills": [..], "edges": [..]}`. The skill
    /// list is authoritative for ordering.
    pub fn from_json_reader<R: Read>(reader: R) -> Result<Self> {
        let file: HierarchyFile = serde_json::from_reader(reader)?;
        Hierarchy::new(file.skills, file.edges)
    }

    /// Reads the edge-list CSV form with header `from,to`. Skill order is
    /// first-appearance order.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        let from_col = headers
            .iter()
            .position(|h| h == "from")
            .ok_or_else(|| Error::MissingEdgeColumn("from".into()))?;
        let to_col = headers
            .iter()
            .position(|h| h == "to")
            .ok_or_else(|| Error::MissingEdgeColumn("to".into()))?;

        let mut skills: Vec<Skill> = Vec::new();
        let mut known = std::collections::HashSet::new();
        let mut edges = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let from = record.get(from_col).unwrap_or("").to_string();
            let to = record.get(to_col).unwrap_or("").to_string();
            for id in [&from, &to] {
                if known.insert(id.clone()) {
                    skills.push(Skill::new(id.clone()));
                }
            }
            edges.push(Edge::new(from, to));
        }
        Hierarchy::new(skills, edges)
    }

    /// Loads a hierarchy file, dispatching on the `.json` extension; anything
    /// else is read as edge-list CSV.
    pub fn from_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        if path.extension().is_some_and(|e| e == "json") {
            Hierarchy::from_json_reader(file)
        } else {
            Hierarchy::from_csv_reader(file)
        }
    }
}

/// Finds directed cycles: one witness cycle per strongly connected component
/// of size > 1, plus one per self-loop. Empty result iff the graph is a DAG.
pub fn find_cycles(node_count: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); node_count];
    for &(u, v) in edges {
        out[u].push(v);
    }

    let mut cycles = Vec::new();
    for &(u, v) in edges {
        if u == v {
            cycles.push(vec![u]);
        }
    }

    for component in tarjan_sccs(node_count, &out) {
        if component.len() > 1 {
            if let Some(witness) = cycle_within(&component, &out) {
                cycles.push(witness);
            }
        }
    }
    cycles
}

fn tarjan_sccs(n: usize, out: &[Vec<usize>]) -> Vec<Vec<usize>> {
    struct State<'a> {
        out: &'a [Vec<usize>],
        index: Vec<Option<usize>>,
        lowlink: Vec<usize>,
        on_stack: Vec<bool>,
        stack: Vec<usize>,
        counter: usize,
        sccs: Vec<Vec<usize>>,
    }

    fn strongconnect(s: &mut State, v: usize) {
        s.index[v] = Some(s.counter);
        s.lowlink[v] = s.counter;
        s.counter += 1;
        s.stack.push(v);
        s.on_stack[v] = true;
        for &w in &s.out[v].to_vec() {
            if s.index[w].is_none() {
                strongconnect(s, w);
                s.lowlink[v] = s.lowlink[v].min(s.lowlink[w]);
            } else if s.on_stack[w] {
                s.lowlink[v] = s.lowlink[v].min(s.index[w].unwrap());
            }
        }
        if s.lowlink[v] == s.index[v].unwrap() {
            let mut scc = Vec::new();
            loop {
                let w = s.stack.pop().unwrap();
                s.on_stack[w] = false;
                scc.push(w);
                if w == v {
                    break;
                }
            }
            scc.reverse();
            s.sccs.push(scc);
        }
    }

    let mut state = State {
        out,
        index: vec![None; n],
        lowlink: vec![0; n],
        on_stack: vec![false; n],
        stack: Vec::new(),
        counter: 0,
        sccs: Vec::new(),
    };
    for v in 0..n {
        if state.index[v].is_none() {
            strongconnect(&mut state, v);
        }
    }
    state.sccs
}

/// DFS restricted to one SCC, returning a path that closes back on its start.
fn cycle_within(component: &[usize], out: &[Vec<usize>]) -> Option<Vec<usize>> {
    let members: std::collections::HashSet<usize> = component.iter().copied().collect();
    let start = component[0];
    let mut path = vec![start];
    let mut visited = std::collections::HashSet::new();
    visited.insert(start);
    loop {
        let current = *path.last().unwrap();
        let next = out[current]
            .iter()
            .copied()
            .find(|v| *v == start || (members.contains(v) && !visited.contains(v)));
        match next {
            Some(v) if v == start => return Some(path),
            Some(v) => {
                visited.insert(v);
                path.push(v);
            }
            None => {
                path.pop();
                if path.is_empty() {
                    return None;
                }
            }
        }
    }
}
