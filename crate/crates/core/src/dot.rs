//! Graphviz export for tree inspection. Nodes are deduplicated by
//! fingerprint, so structure sharing shows up as in-degree > 1.

use std::collections::HashSet;
use std::fmt::Write as _;

use crate::ddt::{Node, NodeKind, StringHandle};

pub fn to_dot(handle: &StringHandle) -> String {
    let mut out = String::new();
    out.push_str("digraph ddt {\n");
    out.push_str("  node [shape=box, fontname=\"monospace\"];\n");
    let mut seen: HashSet<u64> = HashSet::new();
    emit(handle.root(), &mut seen, &mut out);
    out.push_str("}\n");
    out
}

fn emit(node: &Node, seen: &mut HashSet<u64>, out: &mut String) {
    let fp = node.fingerprint().value();
    if !seen.insert(fp) {
        return;
    }
    let label = match node.kind() {
        NodeKind::Leaf(symbol) => format!("leaf {}", printable(*symbol)),
        NodeKind::Duplicate { multiplicity, .. } => format!("dup x{multiplicity}"),
        NodeKind::Increasing { children } => format!("inc [{}]", children.len()),
    };
    let _ = writeln!(
        out,
        "  n{fp:016x} [label=\"{label}\\nL{} #{}\\n{fp:016x}\"];",
        node.level(),
        node.leaf_count()
    );
    match node.kind() {
        NodeKind::Leaf(_) => {}
        NodeKind::Duplicate {
            multiplicity,
            child,
        } => {
            let _ = writeln!(
                out,
                "  n{fp:016x} -> n{:016x} [label=\"x{multiplicity}\"];",
                child.fingerprint().value()
            );
            emit(child, seen, out);
        }
        NodeKind::Increasing { children } => {
            for child in children.iter() {
                let _ = writeln!(
                    out,
                    "  n{fp:016x} -> n{:016x};",
                    child.fingerprint().value()
                );
                emit(child, seen, out);
            }
        }
    }
}

fn printable(symbol: u8) -> String {
    match symbol {
        b' '..=b'~' if symbol != b'"' && symbol != b'\\' => format!("'{}'", symbol as char),
        _ => format!("0x{symbol:02x}"),
    }
}
