//! The versioned JSON file format.

use std::collections::{HashMap, HashSet};

use super::{bounding_box, check_image, Workspace, WorkspaceError};

pub const SCHEMA_VERSION: &str = "1";

pub fn save(ws: &Workspace) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(ws).expect("workspace serializes");
    out.push(b'\n');
    out
}

fn malformed(path: impl Into<String>, message: impl Into<String>) -> WorkspaceError {
    WorkspaceError::MalformedDocument { path: path.into(), message: message.into() }
}

pub fn load(bytes: &[u8]) -> Result<Workspace, WorkspaceError> {
    let value: serde_json::Value = serde_json::from_slice(bytes).map_err(|e| malformed("$", e.to_string()))?;
    match value.get("schema_version") {
        None => return Err(malformed("schema_version", "missing field")),
        Some(serde_json::Value::String(v)) if v == SCHEMA_VERSION => {}
        Some(serde_json::Value::String(v)) => return Err(WorkspaceError::SchemaVersionUnsupported(v.clone())),
        Some(other) => return Err(malformed("schema_version", format!("expected a string, found {other}"))),
    }
    let mut ws: Workspace = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        malformed(path, format!("{} (schema version {SCHEMA_VERSION})", e.into_inner()))
    })?;
    check(&ws)?;
    ws.recompute_depths();
    ws.refresh_latex();
    Ok(ws)
}

fn check(ws: &Workspace) -> Result<(), WorkspaceError> {
    ws.preferences.check().map_err(|m| malformed("preferences", m))?;
    let mut ids = HashSet::new();
    let mut claim = |id: u64, path: String| {
        if id >= ws.next_id {
            return Err(malformed(path, format!("id {id} is not below next_id {}", ws.next_id)));
        }
        if !ids.insert(id) {
            return Err(malformed(path, format!("duplicate id {id}")));
        }
        Ok(())
    };
    for (i, node) in ws.nodes.iter().enumerate() {
        claim(node.id, format!("nodes[{i}].id"))?;
        for (j, eq) in node.equations.iter().enumerate() {
            let at = format!("nodes[{i}].equations[{j}]");
            claim(eq.id, format!("{at}.id"))?;
            eq.expr.validate().map_err(|e| malformed(format!("{at}.expr"), e.to_string()))?;
            if let Some(p) = eq.parent_equation_id {
                if p >= eq.id || node.equation(p).is_none() {
                    return Err(malformed(
                        format!("{at}.parent_equation_id"),
                        format!("{p} is not an earlier equation of node {}", node.id),
                    ));
                }
            }
        }
        for (k, path) in node.markup.iter().enumerate() {
            let at = format!("nodes[{i}].markup[{k}]");
            super::MarkupPath::new(path.points.clone(), path.color, path.thickness)
                .map_err(|e| malformed(&at, e.to_string()))?;
            if path.bounding_box != bounding_box(&path.points) {
                return Err(malformed(format!("{at}.bounding_box"), "does not match the points"));
            }
        }
        for (k, img) in node.images.iter().enumerate() {
            let at = format!("nodes[{i}].images[{k}]");
            claim(img.id, format!("{at}.id"))?;
            check_image(&img.media_type, &img.data_base64).map_err(|e| malformed(&at, e.to_string()))?;
        }
    }
    let nodes: HashSet<u64> = ws.nodes.iter().map(|n| n.id).collect();
    for (i, l) in ws.node_links.iter().enumerate() {
        for (field, id) in [("parent", l.parent), ("child", l.child)] {
            if !nodes.contains(&id) {
                return Err(malformed(format!("node_links[{i}].{field}"), format!("node {id} does not exist")));
            }
        }
    }
    if has_cycle(ws) {
        return Err(malformed("node_links", "links form a cycle"));
    }
    Ok(())
}

fn has_cycle(ws: &Workspace) -> bool {
    let mut indegree: HashMap<u64, usize> = ws.nodes.iter().map(|n| (n.id, 0)).collect();
    for l in &ws.node_links {
        *indegree.get_mut(&l.child).expect("checked") += 1;
    }
    let mut ready: Vec<u64> = indegree.iter().filter(|(_, d)| **d == 0).map(|(id, _)| *id).collect();
    let mut seen = 0;
    while let Some(n) = ready.pop() {
        seen += 1;
        for l in ws.node_links.iter().filter(|l| l.parent == n) {
            let d = indegree.get_mut(&l.child).expect("checked");
            *d -= 1;
            if *d == 0 {
                ready.push(l.child);
            }
        }
    }
    seen != ws.nodes.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::Expr;
    use crate::workspace::Point;

    #[test]
    fn round_trip_and_errors() {
        let mut ws = Workspace::new("demo");
        let a = ws.add_node(Point::new(1.5, 2.25), None).unwrap();
        ws.add_equation(a, Expr::frac(Expr::ident("x"), Expr::num(3)), None).unwrap();
        let bytes = save(&ws);
        let back = load(&bytes).unwrap();
        assert_eq!(back, ws);
        assert_eq!(save(&back), bytes);

        assert!(matches!(load(&bytes[..bytes.len() / 2]), Err(WorkspaceError::MalformedDocument { .. })));
        let future = String::from_utf8(bytes.clone()).unwrap().replace("\"schema_version\": \"1\"", "\"schema_version\": \"2\"");
        assert_eq!(load(future.as_bytes()), Err(WorkspaceError::SchemaVersionUnsupported("2".into())));
        let extra = String::from_utf8(bytes).unwrap().replace("\"title\"", "\"colour\": 1, \"title\"");
        match load(extra.as_bytes()) {
            Err(WorkspaceError::MalformedDocument { path, message }) => {
                assert_eq!(path, "colour");
                assert!(message.contains("colour"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }
}
