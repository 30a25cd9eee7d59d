//! The workspace document: a DAG of subproblem nodes, each holding
//! equations with parent tracking, pen markup and images.

mod persist;

use std::collections::{HashMap, HashSet, VecDeque};

use base64::Engine;
use chrono::{DateTime, SubsecRound, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::{normalize, render_latex, Expr, InvalidExpr, RenderOptions};

pub use persist::{load, save, SCHEMA_VERSION};

pub type NodeId = u64;
pub type EquationId = u64;

/// Decoded size limit for one embedded image.
pub const MAX_IMAGE_BYTES: usize = 5 * 1024 * 1024;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Size {
    pub w: f64,
    pub h: f64,
}

impl Default for Size {
    fn default() -> Self {
        Size { w: 480.0, h: 320.0 }
    }
}

/// Axis-aligned rectangle; edges are inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rect {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl Rect {
    pub fn intersects(&self, other: &Rect) -> bool {
        self.min_x <= other.max_x && other.min_x <= self.max_x && self.min_y <= other.max_y && other.min_y <= self.max_y
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rgba {
    pub r: u8,
    pub g: u8,
    pub b: u8,
    pub a: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarkupPath {
    pub points: Vec<Point>,
    pub color: Rgba,
    pub thickness: f64,
    pub bounding_box: Rect,
}

impl MarkupPath {
    pub fn new(points: Vec<Point>, color: Rgba, thickness: f64) -> Result<Self, WorkspaceError> {
        if points.len() < 2 {
            return Err(WorkspaceError::InvalidMarkup("a path needs at least two points".into()));
        }
        if !(thickness > 0.0 && thickness.is_finite()) {
            return Err(WorkspaceError::InvalidMarkup("thickness must be positive".into()));
        }
        if points.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(WorkspaceError::InvalidMarkup("coordinates must be finite".into()));
        }
        let bounding_box = bounding_box(&points);
        Ok(MarkupPath { points, color, thickness, bounding_box })
    }
}

fn bounding_box(points: &[Point]) -> Rect {
    let mut r = Rect { min_x: f64::INFINITY, min_y: f64::INFINITY, max_x: f64::NEG_INFINITY, max_y: f64::NEG_INFINITY };
    for p in points {
        r.min_x = r.min_x.min(p.x);
        r.min_y = r.min_y.min(p.y);
        r.max_x = r.max_x.max(p.x);
        r.max_y = r.max_y.max(p.y);
    }
    r
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageAttachment {
    pub id: u64,
    pub media_type: String,
    /// Standard base64 of the image bytes.
    pub data_base64: String,
    pub position: Point,
    pub size: Size,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquationEntry {
    pub id: EquationId,
    pub expr: Expr,
    pub latex_cache: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent_equation_id: Option<EquationId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position_override: Option<Point>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubproblemNode {
    pub id: NodeId,
    pub position: Point,
    #[serde(default)]
    pub size: Size,
    /// Longest link path from a root; maintained by the workspace.
    #[serde(default)]
    pub depth: u32,
    #[serde(default)]
    pub equations: Vec<EquationEntry>,
    #[serde(default)]
    pub markup: Vec<MarkupPath>,
    #[serde(default)]
    pub images: Vec<ImageAttachment>,
}

impl SubproblemNode {
    pub fn equation(&self, id: EquationId) -> Option<&EquationEntry> {
        self.equations.iter().find(|e| e.id == id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeLink {
    pub parent: NodeId,
    pub child: NodeId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquationLayout {
    #[default]
    TopToBottom,
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Preferences {
    /// Usefulness multiplier per hop of graph distance.
    pub decay: f64,
    /// Most context equations sent to a backend.
    pub context_cap: usize,
    pub render: RenderOptions,
    pub equation_layout: EquationLayout,
}

impl Default for Preferences {
    fn default() -> Self {
        Preferences { decay: 0.5, context_cap: 12, render: RenderOptions::default(), equation_layout: EquationLayout::default() }
    }
}

impl Preferences {
    pub fn check(&self) -> Result<(), String> {
        if !(self.decay > 0.0 && self.decay < 1.0) {
            return Err(format!("decay must lie strictly between 0 and 1, got {}", self.decay));
        }
        if self.context_cap == 0 {
            return Err("context_cap must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Workspace {
    pub schema_version: String,
    pub id: String,
    pub title: String,
    pub nodes: Vec<SubproblemNode>,
    pub node_links: Vec<NodeLink>,
    #[serde(default)]
    pub preferences: Preferences,
    pub created: DateTime<Utc>,
    pub modified: DateTime<Utc>,
    /// Next value handed out for node, equation and image ids.
    pub next_id: u64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorkspaceError {
    #[error("node {0} does not exist")]
    NodeNotFound(NodeId),
    #[error("parent node {0} does not exist")]
    ParentNotFound(NodeId),
    #[error("linking {parent} -> {child} would form a cycle")]
    CycleWouldForm { parent: NodeId, child: NodeId },
    #[error("equation {0} does not exist")]
    EquationNotFound(EquationId),
    #[error("parent equation {0} is not an earlier equation of the same node")]
    ParentEquationNotFound(EquationId),
    #[error("invalid markup: {0}")]
    InvalidMarkup(String),
    #[error("image is {bytes} bytes, above the {MAX_IMAGE_BYTES}-byte limit")]
    ImageTooLarge { bytes: usize },
    #[error("invalid image: {0}")]
    InvalidImage(String),
    #[error("invalid preferences: {0}")]
    InvalidPreferences(String),
    #[error("unsupported schema version {0:?}")]
    SchemaVersionUnsupported(String),
    #[error("malformed document at `{path}`: {message}")]
    MalformedDocument { path: String, message: String },
    #[error(transparent)]
    Invalid(#[from] InvalidExpr),
}

fn now() -> DateTime<Utc> {
    Utc::now().trunc_subsecs(3)
}

impl Workspace {
    pub fn new(title: impl Into<String>) -> Self {
        let t = now();
        Workspace {
            schema_version: SCHEMA_VERSION.into(),
            id: uuid::Uuid::new_v4().to_string(),
            title: title.into(),
            nodes: Vec::new(),
            node_links: Vec::new(),
            preferences: Preferences::default(),
            created: t,
            modified: t,
            next_id: 1,
        }
    }

    fn fresh_id(&mut self) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    fn touch(&mut self) {
        self.modified = now().max(self.modified);
    }

    pub fn node(&self, id: NodeId) -> Result<&SubproblemNode, WorkspaceError> {
        self.nodes.iter().find(|n| n.id == id).ok_or(WorkspaceError::NodeNotFound(id))
    }

    fn node_mut(&mut self, id: NodeId) -> Result<&mut SubproblemNode, WorkspaceError> {
        self.nodes.iter_mut().find(|n| n.id == id).ok_or(WorkspaceError::NodeNotFound(id))
    }

    /// The node holding an equation, and the entry.
    pub fn equation(&self, id: EquationId) -> Result<(&SubproblemNode, &EquationEntry), WorkspaceError> {
        self.nodes
            .iter()
            .find_map(|n| n.equation(id).map(|e| (n, e)))
            .ok_or(WorkspaceError::EquationNotFound(id))
    }

    pub fn parents(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.node_links.iter().filter(move |l| l.child == id).map(|l| l.parent)
    }

    pub fn children(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.node_links.iter().filter(move |l| l.parent == id).map(|l| l.child)
    }

    /// Appends an empty node, linked under `parent` when given.
    pub fn add_node(&mut self, position: Point, parent: Option<NodeId>) -> Result<NodeId, WorkspaceError> {
        if let Some(p) = parent {
            self.node(p).map_err(|_| WorkspaceError::ParentNotFound(p))?;
        }
        let id = self.fresh_id();
        self.nodes.push(SubproblemNode {
            id,
            position,
            size: Size::default(),
            depth: 0,
            equations: Vec::new(),
            markup: Vec::new(),
            images: Vec::new(),
        });
        if let Some(p) = parent {
            self.node_links.push(NodeLink { parent: p, child: id });
        }
        self.recompute_depths();
        self.touch();
        Ok(id)
    }

    fn reaches(&self, from: NodeId, to: NodeId) -> bool {
        let mut seen = HashSet::new();
        let mut stack = vec![from];
        while let Some(n) = stack.pop() {
            if n == to {
                return true;
            }
            if seen.insert(n) {
                stack.extend(self.children(n));
            }
        }
        false
    }

    pub fn link_nodes(&mut self, parent: NodeId, child: NodeId) -> Result<(), WorkspaceError> {
        self.node(parent)?;
        self.node(child)?;
        if parent == child || self.reaches(child, parent) {
            return Err(WorkspaceError::CycleWouldForm { parent, child });
        }
        let link = NodeLink { parent, child };
        if !self.node_links.contains(&link) {
            self.node_links.push(link);
            self.recompute_depths();
            self.touch();
        }
        Ok(())
    }

    pub fn unlink_nodes(&mut self, parent: NodeId, child: NodeId) -> Result<(), WorkspaceError> {
        self.node(parent)?;
        self.node(child)?;
        self.node_links.retain(|l| *l != NodeLink { parent, child });
        self.recompute_depths();
        self.touch();
        Ok(())
    }

    pub fn move_node(&mut self, id: NodeId, position: Point) -> Result<(), WorkspaceError> {
        self.node_mut(id)?.position = position;
        self.touch();
        Ok(())
    }

    /// Longest-path depth over the link DAG, in topological order.
    pub(crate) fn recompute_depths(&mut self) {
        let mut indegree: HashMap<NodeId, usize> = self.nodes.iter().map(|n| (n.id, 0)).collect();
        for l in &self.node_links {
            *indegree.entry(l.child).or_default() += 1;
        }
        let mut depth: HashMap<NodeId, u32> = self.nodes.iter().map(|n| (n.id, 0)).collect();
        let mut queue: VecDeque<NodeId> =
            self.nodes.iter().map(|n| n.id).filter(|id| indegree[id] == 0).collect();
        while let Some(n) = queue.pop_front() {
            for l in self.node_links.iter().filter(|l| l.parent == n) {
                let d = depth[&n] + 1;
                let slot = depth.entry(l.child).or_default();
                *slot = (*slot).max(d);
                let deg = indegree.get_mut(&l.child).expect("link target is a node");
                *deg -= 1;
                if *deg == 0 {
                    queue.push_back(l.child);
                }
            }
        }
        for node in &mut self.nodes {
            node.depth = depth[&node.id];
        }
    }

    /// Appends an equation; the parent defaults to the node's latest equation.
    pub fn add_equation(
        &mut self,
        node: NodeId,
        expr: Expr,
        parent_equation: Option<EquationId>,
    ) -> Result<EquationId, WorkspaceError> {
        expr.validate()?;
        let render = self.preferences.render;
        let n = self.node(node)?;
        let parent = match parent_equation {
            Some(p) => {
                n.equation(p).ok_or(WorkspaceError::ParentEquationNotFound(p))?;
                Some(p)
            }
            None => n.equations.iter().map(|e| e.id).max(),
        };
        let id = self.fresh_id();
        let expr = normalize(&expr);
        let latex_cache = render_latex(&expr, &render);
        self.node_mut(node)?.equations.push(EquationEntry {
            id,
            expr,
            latex_cache,
            parent_equation_id: parent,
            annotation: None,
            position_override: None,
        });
        self.touch();
        Ok(id)
    }

    fn entry_mut(&mut self, id: EquationId) -> Result<&mut EquationEntry, WorkspaceError> {
        self.nodes
            .iter_mut()
            .find_map(|n| n.equations.iter_mut().find(|e| e.id == id))
            .ok_or(WorkspaceError::EquationNotFound(id))
    }

    pub fn update_equation(&mut self, id: EquationId, expr: Expr) -> Result<(), WorkspaceError> {
        expr.validate()?;
        let render = self.preferences.render;
        let entry = self.entry_mut(id)?;
        entry.expr = normalize(&expr);
        entry.latex_cache = render_latex(&entry.expr, &render);
        self.touch();
        Ok(())
    }

    pub fn set_annotation(&mut self, id: EquationId, annotation: Option<String>) -> Result<(), WorkspaceError> {
        self.entry_mut(id)?.annotation = annotation.filter(|a| !a.trim().is_empty());
        self.touch();
        Ok(())
    }

    pub fn move_equation(&mut self, id: EquationId, position: Option<Point>) -> Result<(), WorkspaceError> {
        self.entry_mut(id)?.position_override = position;
        self.touch();
        Ok(())
    }

    /// Removes an equation; its children inherit its parent.
    pub fn delete_equation(&mut self, id: EquationId) -> Result<(), WorkspaceError> {
        let (node, entry) = self.equation(id)?;
        let (node, grandparent) = (node.id, entry.parent_equation_id);
        let n = self.node_mut(node)?;
        n.equations.retain(|e| e.id != id);
        for e in &mut n.equations {
            if e.parent_equation_id == Some(id) {
                e.parent_equation_id = grandparent;
            }
        }
        self.touch();
        Ok(())
    }

    pub fn set_preferences(&mut self, preferences: Preferences) -> Result<(), WorkspaceError> {
        preferences.check().map_err(WorkspaceError::InvalidPreferences)?;
        self.preferences = preferences;
        self.refresh_latex();
        self.touch();
        Ok(())
    }

    pub(crate) fn refresh_latex(&mut self) {
        let render = self.preferences.render;
        for e in self.nodes.iter_mut().flat_map(|n| n.equations.iter_mut()) {
            e.latex_cache = render_latex(&e.expr, &render);
        }
    }

    pub fn add_markup(&mut self, node: NodeId, path: MarkupPath) -> Result<(), WorkspaceError> {
        let path = MarkupPath::new(path.points, path.color, path.thickness)?;
        self.node_mut(node)?.markup.push(path);
        self.touch();
        Ok(())
    }

    pub fn add_image(
        &mut self,
        node: NodeId,
        media_type: &str,
        data_base64: &str,
        position: Point,
        size: Size,
    ) -> Result<u64, WorkspaceError> {
        self.node(node)?;
        check_image(media_type, data_base64)?;
        let id = self.fresh_id();
        self.node_mut(node)?.images.push(ImageAttachment {
            id,
            media_type: media_type.into(),
            data_base64: data_base64.into(),
            position,
            size,
        });
        self.touch();
        Ok(id)
    }

    /// Duplicates a node's contents with fresh ids and no links.
    pub fn copy_node(&mut self, id: NodeId) -> Result<NodeId, WorkspaceError> {
        let mut copy = self.node(id)?.clone();
        copy.id = self.fresh_id();
        copy.position = Point::new(copy.position.x + 40.0, copy.position.y + 40.0);
        copy.depth = 0;
        let mut remap = HashMap::new();
        for e in &mut copy.equations {
            let fresh = self.fresh_id();
            remap.insert(e.id, fresh);
            e.id = fresh;
        }
        for e in &mut copy.equations {
            e.parent_equation_id = e.parent_equation_id.map(|p| remap[&p]);
        }
        for img in &mut copy.images {
            img.id = self.fresh_id();
        }
        let new_id = copy.id;
        self.nodes.push(copy);
        self.touch();
        Ok(new_id)
    }

    pub fn delete_node(&mut self, id: NodeId) -> Result<(), WorkspaceError> {
        self.node(id)?;
        self.nodes.retain(|n| n.id != id);
        self.node_links.retain(|l| l.parent != id && l.child != id);
        self.recompute_depths();
        self.touch();
        Ok(())
    }
}

pub(crate) fn check_image(media_type: &str, data_base64: &str) -> Result<(), WorkspaceError> {
    if !media_type.starts_with("image/") {
        return Err(WorkspaceError::InvalidImage(format!("media type {media_type:?} is not an image type")));
    }
    // Decoded length is known before decoding; reject oversize input early.
    let estimate = data_base64.len() / 4 * 3;
    if estimate > MAX_IMAGE_BYTES + 3 {
        return Err(WorkspaceError::ImageTooLarge { bytes: estimate });
    }
    let bytes = base64::engine::general_purpose::STANDARD
        .decode(data_base64)
        .map_err(|e| WorkspaceError::InvalidImage(e.to_string()))?;
    if bytes.len() > MAX_IMAGE_BYTES {
        return Err(WorkspaceError::ImageTooLarge { bytes: bytes.len() });
    }
    Ok(())
}

/// Paths whose bounding boxes intersect `viewport`.
pub fn visible_paths<'a>(node: &'a SubproblemNode, viewport: &Rect) -> Vec<&'a MarkupPath> {
    node.markup.iter().filter(|p| p.bounding_box.intersects(viewport)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depths_follow_links() {
        let mut ws = Workspace::new("t");
        let a = ws.add_node(Point::default(), None).unwrap();
        let b = ws.add_node(Point::default(), Some(a)).unwrap();
        let c = ws.add_node(Point::default(), Some(b)).unwrap();
        assert_eq!([0, 1, 2], [a, b, c].map(|id| ws.node(id).unwrap().depth));
        assert_eq!(ws.link_nodes(c, a), Err(WorkspaceError::CycleWouldForm { parent: c, child: a }));
        assert_eq!(ws.add_node(Point::default(), Some(99)), Err(WorkspaceError::ParentNotFound(99)));
        ws.delete_node(b).unwrap();
        assert_eq!(ws.node(c).unwrap().depth, 0);
    }

    #[test]
    fn equation_parents_default_to_latest() {
        let mut ws = Workspace::new("t");
        let a = ws.add_node(Point::default(), None).unwrap();
        let b = ws.add_node(Point::default(), None).unwrap();
        let e1 = ws.add_equation(a, Expr::ident("x"), None).unwrap();
        let e2 = ws.add_equation(a, Expr::ident("y"), None).unwrap();
        let other = ws.add_equation(b, Expr::ident("z"), None).unwrap();
        assert_eq!(ws.equation(e1).unwrap().1.parent_equation_id, None);
        assert_eq!(ws.equation(e2).unwrap().1.parent_equation_id, Some(e1));
        assert_eq!(ws.add_equation(a, Expr::num(1), Some(other)), Err(WorkspaceError::ParentEquationNotFound(other)));
        ws.delete_equation(e1).unwrap();
        assert_eq!(ws.equation(e2).unwrap().1.parent_equation_id, None);
    }

    #[test]
    fn markup_and_images_are_checked() {
        let red = Rgba { r: 255, g: 0, b: 0, a: 255 };
        assert!(MarkupPath::new(vec![Point::new(0.0, 0.0)], red, 1.0).is_err());
        assert!(MarkupPath::new(vec![Point::new(0.0, 0.0), Point::new(1.0, 1.0)], red, 0.0).is_err());
        let p = MarkupPath::new(vec![Point::new(3.0, -1.0), Point::new(1.0, 4.0)], red, 2.0).unwrap();
        assert_eq!(p.bounding_box, Rect { min_x: 1.0, min_y: -1.0, max_x: 3.0, max_y: 4.0 });
        assert!(check_image("image/png", "aGVsbG8=").is_ok());
        assert!(matches!(check_image("image/png", "***"), Err(WorkspaceError::InvalidImage(_))));
        assert!(matches!(check_image("text/plain", "aGVsbG8="), Err(WorkspaceError::InvalidImage(_))));
        let big = "A".repeat((MAX_IMAGE_BYTES / 3 + 10) * 4);
        assert!(matches!(check_image("image/png", &big), Err(WorkspaceError::ImageTooLarge { .. })));
    }
}
