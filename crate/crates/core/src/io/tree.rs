use std::path::Path;

use super::{read_to_string, write_atomic};
use crate::clustering::Dendrogram;
use crate::error::{Error, Result};

pub fn render_dendrogram_json(dend: &Dendrogram) -> String {
    let mut s = serde_json::to_string_pretty(dend).expect("dendrogram serializes");
    s.push('\n');
    s
}

pub fn save_dendrogram_json(dend: &Dendrogram, path: &Path) -> Result<()> {
    write_atomic(path, render_dendrogram_json(dend).as_bytes())
}

pub fn load_dendrogram_json(path: &Path) -> Result<Dendrogram> {
    serde_json::from_str(&read_to_string(path)?).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        msg: e.to_string(),
    })
}

fn newick_label(label: &str) -> String {
    let plain = !label.is_empty()
        && label
            .chars()
            .all(|c| !c.is_whitespace() && !"()[]':;,".contains(c));
    if plain {
        label.to_string()
    } else {
        format!("'{}'", label.replace('\'', "''"))
    }
}

/// Newick text with branch lengths equal to height differences. Children
/// appear in the dendrogram's leaf order.
pub fn render_newick(dend: &Dendrogram) -> String {
    let m = dend.n_leaves();
    let mut pos = vec![0; m];
    for (i, &leaf) in dend.leaf_order().iter().enumerate() {
        pos[leaf] = i;
    }
    // First leaf position of every node, leaves then merges.
    let mut first: Vec<usize> = pos.clone();
    for mg in dend.merges() {
        first.push(first[mg.left].min(first[mg.right]));
    }

    fn node(dend: &Dendrogram, first: &[usize], n: usize, out: &mut String) {
        match dend.children(n) {
            None => out.push_str(&newick_label(&dend.labels()[n])),
            Some((a, b)) => {
                let (a, b) = if first[a] <= first[b] { (a, b) } else { (b, a) };
                out.push('(');
                for (i, child) in [a, b].into_iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    node(dend, first, child, out);
                    let len = dend.node_height(n) - dend.node_height(child);
                    out.push_str(&format!(":{len}"));
                }
                out.push(')');
            }
        }
    }

    let mut out = String::new();
    node(dend, &first, dend.root(), &mut out);
    out.push_str(";\n");
    out
}

pub fn save_dendrogram_newick(dend: &Dendrogram, path: &Path) -> Result<()> {
    write_atomic(path, render_newick(dend).as_bytes())
}
