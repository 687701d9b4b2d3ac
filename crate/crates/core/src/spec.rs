//! Declarative transform descriptors and pipelines.
//!
//! On disk a pipeline is a JSON array of nodes:
//!
//! ```json
//! [
//!   {"op": "rotate", "params": {"degrees": {"uniform": [-30, 30]}}, "p": 0.5},
//!   {"op": "compose", "children": [{"op": "hflip"}], "p": 1.0}
//! ]
//! ```

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::{Error, Params, Result};

pub const COMPOSE: &str = "compose";

#[derive(Debug, Clone, PartialEq)]
pub struct TransformSpec {
    pub name: String,
    pub params: Params,
    pub p: f64,
}

impl TransformSpec {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            params: Params::new(),
            p: 1.0,
        }
    }

    pub fn with(mut self, key: impl Into<String>, value: impl Into<Value>) -> Self {
        self.params.insert(key, value);
        self
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = p;
        self
    }

    pub fn check_probability(&self) -> Result<()> {
        check_p(&self.name, self.p)
    }
}

fn check_p(op: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::invalid(op, format!("probability p = {p} outside [0, 1]")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Transform(TransformSpec),
    Compose { children: Vec<Node>, p: f64 },
}

impl Node {
    pub fn p(&self) -> f64 {
        match self {
            Node::Transform(t) => t.p,
            Node::Compose { p, .. } => *p,
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Node::Transform(t) => &t.name,
            Node::Compose { .. } => COMPOSE,
        }
    }
}

impl From<TransformSpec> for Node {
    fn from(spec: TransformSpec) -> Self {
        Node::Transform(spec)
    }
}

impl From<Pipeline> for Node {
    fn from(p: Pipeline) -> Self {
        Node::Compose {
            children: p.children,
            p: 1.0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Pipeline {
    pub children: Vec<Node>,
}

impl Pipeline {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn of(children: impl IntoIterator<Item = impl Into<Node>>) -> Self {
        Self {
            children: children.into_iter().map(Into::into).collect(),
        }
    }

    pub fn then(mut self, node: impl Into<Node>) -> Self {
        self.children.push(node.into());
        self
    }

    pub fn len(&self) -> usize {
        self.children.len()
    }

    pub fn is_empty(&self) -> bool {
        self.children.is_empty()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_value(value: &Value) -> Result<Self> {
        Ok(Pipeline::deserialize(value)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("pipeline serializes")
    }

    /// Every transform name used anywhere in the pipeline.
    pub fn transform_names(&self) -> Vec<&str> {
        fn walk<'a>(nodes: &'a [Node], out: &mut Vec<&'a str>) {
            for n in nodes {
                match n {
                    Node::Transform(t) => out.push(&t.name),
                    Node::Compose { children, .. } => walk(children, out),
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.children, &mut out);
        out
    }

    pub(crate) fn check_probabilities(nodes: &[Node]) -> Result<()> {
        for n in nodes {
            match n {
                Node::Transform(t) => t.check_probability()?,
                Node::Compose { children, p } => {
                    check_p(COMPOSE, *p)?;
                    Self::check_probabilities(children)?;
                }
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNode {
    op: String,
    #[serde(default, skip_serializing_if = "Params::is_empty")]
    params: Params,
    #[serde(default = "one")]
    p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    children: Option<Vec<RawNode>>,
}

fn one() -> f64 {
    1.0
}

impl RawNode {
    fn into_node(self) -> std::result::Result<Node, String> {
        if self.op == COMPOSE {
            if !self.params.is_empty() {
                return Err("compose nodes take `children`, not `params`".into());
            }
            let children = self
                .children
                .ok_or("compose node without `children`")?
                .into_iter()
                .map(RawNode::into_node)
                .collect::<std::result::Result<_, _>>()?;
            Ok(Node::Compose { children, p: self.p })
        } else {
            if self.children.is_some() {
                return Err(format!("`{}` does not take `children`", self.op));
            }
            Ok(Node::Transform(TransformSpec {
                name: self.op,
                params: self.params,
                p: self.p,
            }))
        }
    }

    fn from_node(node: &Node) -> RawNode {
        match node {
            Node::Transform(t) => RawNode {
                op: t.name.clone(),
                params: t.params.clone(),
                p: t.p,
                children: None,
            },
            Node::Compose { children, p } => RawNode {
                op: COMPOSE.into(),
                params: Params::new(),
                p: *p,
                children: Some(children.iter().map(RawNode::from_node).collect()),
            },
        }
    }
}

impl Serialize for Pipeline {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let raw: Vec<RawNode> = self.children.iter().map(RawNode::from_node).collect();
        raw.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Pipeline {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<RawNode>::deserialize(d)?;
        let children = raw
            .into_iter()
            .map(RawNode::into_node)
            .collect::<std::result::Result<_, _>>()
            .map_err(D::Error::custom)?;
        Ok(Pipeline { children })
    }
}

impl Serialize for TransformSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RawNode::from_node(&Node::Transform(self.clone())).serialize(s)
    }
}

/// Same object form as a pipeline node; `compose` is rejected.
impl<'de> Deserialize<'de> for TransformSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match RawNode::deserialize(d)?.into_node().map_err(D::Error::custom)? {
            Node::Transform(t) => Ok(t),
            Node::Compose { .. } => Err(D::Error::custom("expected a single transform, got `compose`")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_nested_config() {
        let text = r#"[
            {"op": "rotate", "params": {"degrees": 90}, "p": 0.5},
            {"op": "compose", "children": [{"op": "hflip"}]}
        ]"#;
        let p = Pipeline::from_json(text).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.children[0].p(), 0.5);
        assert_eq!(p.transform_names(), vec!["rotate", "hflip"]);
        let again = Pipeline::from_json(&p.to_json()).unwrap();
        assert_eq!(again, p);
    }

    #[test]
    fn single_spec_round_trip() {
        let spec: TransformSpec = serde_json::from_str(r#"{"op": "blur", "params": {"radius": 2}}"#).unwrap();
        assert_eq!(spec, TransformSpec::new("blur").with("radius", 2));
        let back: TransformSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
        assert!(serde_json::from_str::<TransformSpec>(r#"{"op": "compose", "children": []}"#).is_err());
    }

    #[test]
    fn rejects_malformed_nodes() {
        assert!(Pipeline::from_json(r#"[{"op": "compose"}]"#).is_err());
        assert!(Pipeline::from_json(r#"[{"op": "hflip", "children": []}]"#).is_err());
        assert!(Pipeline::from_json(r#"[{"op": "hflip", "prob": 1}]"#).is_err());
        assert!(Pipeline::from_json(r#"{"op": "hflip"}"#).is_err());
    }
}
