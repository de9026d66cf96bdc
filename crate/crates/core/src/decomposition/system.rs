use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::alphabet::{Alphabet, Symbol};
use crate::error::{Error, Result};

/// On-disk form of a cone-type system.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub version: u32,
    pub types: Vec<TypeFile>,
    pub root: RootFile,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TypeFile {
    pub name: String,
    pub part_size: usize,
    pub parent_adhesion: Vec<usize>,
    pub edges: Vec<EdgeFile>,
    pub children: Vec<ChildFile>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeFile {
    pub u: usize,
    pub v: usize,
    pub label_uv: String,
    pub label_vu: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChildFile {
    #[serde(rename = "type")]
    pub child_type: String,
    pub embedding: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RootFile {
    #[serde(rename = "type")]
    pub root_type: String,
    pub vertex: usize,
}

impl SystemFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub k_max: usize,
    pub type_count: usize,
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_accepted(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            write!(
                f,
                "accepted ({} types, k_max = {})",
                self.type_count, self.k_max
            )
        } else {
            write!(f, "{}", self.violations.join("; "))
        }
    }
}

pub type TypeId = usize;
pub type LocalVertex = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeSpec {
    pub u: LocalVertex,
    pub v: LocalVertex,
    pub label_uv: Symbol,
    pub label_vu: Symbol,
}

impl EdgeSpec {
    /// Label read when traversing the edge away from `from`.
    pub fn label_from(&self, from: LocalVertex) -> Symbol {
        if from == self.u {
            self.label_uv
        } else {
            self.label_vu
        }
    }

    pub fn other(&self, x: LocalVertex) -> LocalVertex {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChildSlot {
    pub child_type: TypeId,
    /// Parent-local vertices, aligned with the child's `parent_adhesion`.
    pub embedding: Vec<LocalVertex>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeType {
    pub name: String,
    pub part_size: usize,
    pub parent_adhesion: Vec<LocalVertex>,
    pub own_edges: Vec<EdgeSpec>,
    pub children: Vec<ChildSlot>,
}

/// A validated cone-type system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeTypeSystem {
    pub types: Vec<ConeType>,
    pub root_type: TypeId,
    pub root_vertex: LocalVertex,
    pub alphabet: Alphabet,
    pub k_max: usize,
}

impl ConeTypeSystem {
    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_file(&SystemFile::from_json(text)?)
    }

    pub fn from_file(file: &SystemFile) -> Result<Self> {
        let report = validate_system(file);
        if !report.is_accepted() {
            return Err(Error::InvalidSystem(report));
        }
        let alphabet = Alphabet::from_labels(
            file.types
                .iter()
                .flat_map(|t| t.edges.iter())
                .flat_map(|e| [e.label_uv.clone(), e.label_vu.clone()]),
        );
        let index: HashMap<&str, TypeId> = file
            .types
            .iter()
            .enumerate()
            .map(|(i, t)| (t.name.as_str(), i))
            .collect();
        let types = file
            .types
            .iter()
            .map(|t| ConeType {
                name: t.name.clone(),
                part_size: t.part_size,
                parent_adhesion: t.parent_adhesion.clone(),
                own_edges: t
                    .edges
                    .iter()
                    .map(|e| EdgeSpec {
                        u: e.u,
                        v: e.v,
                        label_uv: alphabet.symbol(&e.label_uv).unwrap(),
                        label_vu: alphabet.symbol(&e.label_vu).unwrap(),
                    })
                    .collect(),
                children: t
                    .children
                    .iter()
                    .map(|c| ChildSlot {
                        child_type: index[c.child_type.as_str()],
                        embedding: c.embedding.clone(),
                    })
                    .collect(),
            })
            .collect();
        Ok(ConeTypeSystem {
            types,
            root_type: index[file.root.root_type.as_str()],
            root_vertex: file.root.vertex,
            alphabet,
            k_max: report.k_max,
        })
    }

    pub fn is_root(&self, t: TypeId) -> bool {
        t == self.root_type
    }

    pub fn type_by_name(&self, name: &str) -> Option<TypeId> {
        self.types.iter().position(|t| t.name == name)
    }
}

/// Checks a parsed system file. Violations are collected, never raised.
pub fn validate_system(file: &SystemFile) -> ValidationReport {
    let mut v = Vec::new();
    if file.version != 1 {
        v.push(format!("unsupported version {}", file.version));
    }

    let mut index: HashMap<&str, TypeId> = HashMap::new();
    for (i, t) in file.types.iter().enumerate() {
        if index.insert(t.name.as_str(), i).is_some() {
            v.push(format!("duplicate type name {:?}", t.name));
        }
    }
    let root = index.get(file.root.root_type.as_str()).copied();
    match root {
        None => v.push(format!(
            "root type {:?} does not exist",
            file.root.root_type
        )),
        Some(r) => {
            let rt = &file.types[r];
            if !rt.parent_adhesion.is_empty() {
                v.push(format!(
                    "root type {:?} has a nonempty parent adhesion",
                    rt.name
                ));
            }
            if file.root.vertex >= rt.part_size {
                v.push(format!("root vertex {} is out of range", file.root.vertex));
            }
        }
    }

    for (i, t) in file.types.iter().enumerate() {
        let name = &t.name;
        if t.part_size == 0 {
            v.push(format!("type {name:?}: empty part"));
        }
        if Some(i) != root && t.parent_adhesion.is_empty() {
            v.push(format!(
                "type {name:?}: non-root type with empty parent adhesion"
            ));
        }
        check_vertex_list(
            &mut v,
            name,
            "parent adhesion",
            &t.parent_adhesion,
            t.part_size,
        );

        let mut seen_edges = HashSet::new();
        let mut outgoing: HashMap<(usize, &str), usize> = HashMap::new();
        for (j, e) in t.edges.iter().enumerate() {
            if e.u >= t.part_size || e.v >= t.part_size {
                v.push(format!(
                    "type {name:?}: edge {j} has an endpoint out of range"
                ));
                continue;
            }
            if e.u == e.v {
                v.push(format!("type {name:?}: edge {j} is a loop"));
                continue;
            }
            let key = if e.u < e.v {
                (e.u, e.v, e.label_uv.as_str(), e.label_vu.as_str())
            } else {
                (e.v, e.u, e.label_vu.as_str(), e.label_uv.as_str())
            };
            if !seen_edges.insert(key) {
                v.push(format!(
                    "type {name:?}: edge {j} duplicates an earlier edge"
                ));
            }
            for (from, label) in [(e.u, e.label_uv.as_str()), (e.v, e.label_vu.as_str())] {
                *outgoing.entry((from, label)).or_default() += 1;
            }
        }
        let mut clashes: Vec<_> = outgoing
            .into_iter()
            .filter(|&(_, n)| n > 1)
            .map(|(k, _)| k)
            .collect();
        clashes.sort();
        for (x, label) in clashes {
            v.push(format!(
                "type {name:?}: label {label:?} leaves vertex {x} more than once"
            ));
        }

        for (s, c) in t.children.iter().enumerate() {
            let what = format!("child slot {s} embedding");
            check_vertex_list(&mut v, name, &what, &c.embedding, t.part_size);
            match index.get(c.child_type.as_str()) {
                None => v.push(format!(
                    "type {name:?}: child slot {s} refers to unknown type {:?}",
                    c.child_type
                )),
                Some(&ct) => {
                    if Some(ct) == root {
                        v.push(format!("type {name:?}: child slot {s} uses the root type"));
                    } else if file.types[ct].parent_adhesion.len() != c.embedding.len() {
                        v.push(format!(
                            "type {name:?}: child slot {s} embedding has length {} but {:?} has an adhesion of size {}",
                            c.embedding.len(),
                            c.child_type,
                            file.types[ct].parent_adhesion.len()
                        ));
                    }
                }
            }
        }
    }

    let mut k_max = 0;
    if let Some(r) = root {
        let reach = reachable(file, &index, r);
        for (i, t) in file.types.iter().enumerate() {
            if !reach[i] {
                v.push(format!("type {:?} is unreachable from the root", t.name));
            }
        }
        for (i, t) in file.types.iter().enumerate() {
            if reach[i] {
                k_max = k_max.max(t.parent_adhesion.len());
            }
        }
        let productive = productive(file, &index);
        for (i, t) in file.types.iter().enumerate() {
            if !productive[i] {
                v.push(format!(
                    "type {:?} is unproductive (no edges in its cone)",
                    t.name
                ));
            }
        }
        if v.is_empty() {
            v.extend(global_label_clashes(file, &index, &reach));
        }
    }

    ValidationReport {
        k_max,
        type_count: file.types.len(),
        violations: v,
    }
}

fn check_vertex_list(v: &mut Vec<String>, name: &str, what: &str, list: &[usize], size: usize) {
    if list.iter().any(|&x| x >= size) {
        v.push(format!("type {name:?}: {what} has an entry out of range"));
    }
    let distinct: HashSet<_> = list.iter().collect();
    if distinct.len() != list.len() {
        v.push(format!("type {name:?}: {what} not injective"));
    }
}

fn child_ids<'a>(
    t: &'a TypeFile,
    index: &'a HashMap<&str, TypeId>,
) -> impl Iterator<Item = (usize, TypeId)> + 'a {
    t.children
        .iter()
        .enumerate()
        .filter_map(|(s, c)| index.get(c.child_type.as_str()).map(|&ct| (s, ct)))
}

fn reachable(file: &SystemFile, index: &HashMap<&str, TypeId>, root: TypeId) -> Vec<bool> {
    let mut seen = vec![false; file.types.len()];
    let mut queue = VecDeque::from([root]);
    seen[root] = true;
    while let Some(t) = queue.pop_front() {
        for (_, c) in child_ids(&file.types[t], index) {
            if !seen[c] {
                seen[c] = true;
                queue.push_back(c);
            }
        }
    }
    seen
}

fn productive(file: &SystemFile, index: &HashMap<&str, TypeId>) -> Vec<bool> {
    let mut prod: Vec<bool> = file.types.iter().map(|t| !t.edges.is_empty()).collect();
    loop {
        let mut changed = false;
        for (i, t) in file.types.iter().enumerate() {
            if !prod[i] && child_ids(t, index).any(|(_, c)| prod[c]) {
                prod[i] = true;
                changed = true;
            }
        }
        if !changed {
            return prod;
        }
    }
}

/// Label determinism after gluing. A glued vertex collects the labels of every
/// part containing it; those parts form a subtree hanging below the topmost
/// one, so walking down the slot embeddings from each (type, vertex) that is
/// not in its parent adhesion visits every contribution exactly once.
fn global_label_clashes(
    file: &SystemFile,
    index: &HashMap<&str, TypeId>,
    reach: &[bool],
) -> Vec<String> {
    let own: Vec<Vec<Vec<&str>>> = file
        .types
        .iter()
        .map(|t| {
            let mut at = vec![Vec::new(); t.part_size];
            for e in &t.edges {
                at[e.u].push(e.label_uv.as_str());
                at[e.v].push(e.label_vu.as_str());
            }
            at
        })
        .collect();
    // (type, vertex) -> (child type, child vertex) for each slot containing it
    let down = |t: TypeId, x: usize| -> Vec<(TypeId, usize)> {
        let tf = &file.types[t];
        child_ids(tf, index)
            .filter_map(|(s, c)| {
                let pos = tf.children[s].embedding.iter().position(|&y| y == x)?;
                Some((c, file.types[c].parent_adhesion[pos]))
            })
            .collect()
    };

    let mut out = Vec::new();
    for (t, tf) in file.types.iter().enumerate() {
        if !reach[t] {
            continue;
        }
        for x in 0..tf.part_size {
            if tf.parent_adhesion.contains(&x) {
                continue;
            }
            let mut labels: BTreeMap<&str, usize> = BTreeMap::new();
            let mut stack = vec![(t, x, vec![(t, x)])];
            let mut infinite = false;
            let mut steps = 0usize;
            while let Some((ct, cx, path)) = stack.pop() {
                steps += 1;
                if steps > 100_000 {
                    infinite = true;
                    break;
                }
                for &l in &own[ct][cx] {
                    *labels.entry(l).or_default() += 1;
                }
                for next in down(ct, cx) {
                    if path.contains(&next) {
                        if !own[next.0][next.1].is_empty() || !down(next.0, next.1).is_empty() {
                            infinite = true;
                        }
                        continue;
                    }
                    let mut p = path.clone();
                    p.push(next);
                    stack.push((next.0, next.1, p));
                }
            }
            if infinite {
                out.push(format!(
                    "vertex {x} of type {:?} lies in infinitely many parts",
                    tf.name
                ));
            }
            for (l, n) in labels {
                if n > 1 {
                    out.push(format!(
                        "label {l:?} leaves the glued image of vertex {x} of type {:?} {n} times",
                        tf.name
                    ));
                }
            }
        }
    }
    out
}
