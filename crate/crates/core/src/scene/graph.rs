//! Semantic scene graph: rooms, furniture and objects linked by containment.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::SceneError;

/// The three free-text attributes the semantic oracle reasons over.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemanticAttributes {
    pub location: String,
    pub category: String,
    pub usage: String,
}

impl SemanticAttributes {
    pub fn new(location: &str, category: &str, usage: &str) -> Self {
        Self {
            location: location.to_owned(),
            category: category.to_owned(),
            usage: usage.to_owned(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoomNode {
    pub name: String,
    #[serde(default)]
    pub attributes: SemanticAttributes,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FurnitureNode {
    pub name: String,
    pub room: String,
    pub attributes: SemanticAttributes,
}

/// An object resting on a piece of furniture. `on_furniture` is `None` only
/// while the robot holds the object.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectNode {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub on_furniture: Option<String>,
    pub attributes: SemanticAttributes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Room,
    Furniture,
    Object,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SceneGraph {
    pub rooms: Vec<RoomNode>,
    pub furniture: Vec<FurnitureNode>,
    pub objects: Vec<ObjectNode>,
}

impl SceneGraph {
    /// Parses and validates a scene-graph document.
    pub fn from_json(document: &str) -> Result<Self, SceneError> {
        let graph: SceneGraph = serde_json::from_str(document).map_err(|e| SceneError::Parse(e.to_string()))?;
        graph.validate()?;
        Ok(graph)
    }

    /// Canonical document: pretty-printed with object keys sorted.
    pub fn to_canonical_json(&self) -> String {
        canonical_json(self)
    }

    pub fn validate(&self) -> Result<(), SceneError> {
        let mut seen = BTreeSet::new();
        let names = self
            .rooms
            .iter()
            .map(|r| &r.name)
            .chain(self.furniture.iter().map(|f| &f.name))
            .chain(self.objects.iter().map(|o| &o.name));
        for name in names {
            if name.is_empty() {
                return Err(SceneError::EmptyName);
            }
            if !seen.insert(name.as_str()) {
                return Err(SceneError::DuplicateName(name.clone()));
            }
        }
        for f in &self.furniture {
            if self.room(&f.room).is_none() {
                return Err(SceneError::DanglingReference {
                    node: f.name.clone(),
                    target: f.room.clone(),
                });
            }
            require_attributes(&f.name, &f.attributes)?;
        }
        for o in &self.objects {
            match &o.on_furniture {
                Some(fur) if self.furniture(fur).is_some() => {}
                Some(fur) => {
                    return Err(SceneError::DanglingReference {
                        node: o.name.clone(),
                        target: fur.clone(),
                    })
                }
                None => return Err(SceneError::MissingSupport(o.name.clone())),
            }
            require_attributes(&o.name, &o.attributes)?;
        }
        Ok(())
    }

    pub fn room(&self, name: &str) -> Option<&RoomNode> {
        self.rooms.iter().find(|r| r.name == name)
    }

    pub fn furniture(&self, name: &str) -> Option<&FurnitureNode> {
        self.furniture.iter().find(|f| f.name == name)
    }

    pub fn object(&self, name: &str) -> Option<&ObjectNode> {
        self.objects.iter().find(|o| o.name == name)
    }

    pub fn object_mut(&mut self, name: &str) -> Option<&mut ObjectNode> {
        self.objects.iter_mut().find(|o| o.name == name)
    }

    pub fn kind_of(&self, name: &str) -> Option<NodeKind> {
        if self.room(name).is_some() {
            Some(NodeKind::Room)
        } else if self.furniture(name).is_some() {
            Some(NodeKind::Furniture)
        } else if self.object(name).is_some() {
            Some(NodeKind::Object)
        } else {
            None
        }
    }

    pub fn room_count(&self) -> usize {
        self.rooms.len()
    }

    pub fn furniture_count(&self) -> usize {
        self.furniture.len()
    }

    pub fn object_count(&self) -> usize {
        self.objects.len()
    }

    /// Objects currently resting on `furniture`, in document order.
    pub fn objects_on<'a>(&'a self, furniture: &'a str) -> impl Iterator<Item = &'a ObjectNode> {
        self.objects
            .iter()
            .filter(move |o| o.on_furniture.as_deref() == Some(furniture))
    }

    /// Room that ultimately contains `object`, following object -> furniture -> room.
    pub fn room_of_object(&self, object: &str) -> Option<&str> {
        let fur = self.object(object)?.on_furniture.as_deref()?;
        self.furniture(fur).map(|f| f.room.as_str())
    }
}

fn require_attributes(name: &str, attrs: &SemanticAttributes) -> Result<(), SceneError> {
    if attrs.category.is_empty() || attrs.usage.is_empty() {
        return Err(SceneError::MissingAttributes(name.to_owned()));
    }
    Ok(())
}

/// Serializes through `serde_json::Value`, whose maps are ordered, so keys
/// come out sorted regardless of struct field order.
pub(crate) fn canonical_json<T: Serialize>(value: &T) -> String {
    let value = serde_json::to_value(value).expect("scene types always serialize");
    let mut text = serde_json::to_string_pretty(&value).expect("json value always serializes");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "rooms": [{"name": "kitchen", "attributes": {"location": "", "category": "", "usage": ""}}],
        "furniture": [{"name": "counter_1", "room": "kitchen",
            "attributes": {"location": "kitchen", "category": "counter", "usage": "food preparation"}}],
        "objects": [{"name": "cup_1", "on_furniture": "counter_1",
            "attributes": {"location": "kitchen counter", "category": "kitchenware", "usage": "drinking beverage"}}]
    }"#;

    #[test]
    fn minimal_document_loads() {
        let g = SceneGraph::from_json(MINIMAL).unwrap();
        assert_eq!((g.room_count(), g.furniture_count(), g.object_count()), (1, 1, 1));
        assert_eq!(g.room_of_object("cup_1"), Some("kitchen"));
    }

    #[test]
    fn dangling_object_reference_names_node() {
        let doc = MINIMAL.replace("\"on_furniture\": \"counter_1\"", "\"on_furniture\": \"ghost_table\"");
        match SceneGraph::from_json(&doc) {
            Err(SceneError::DanglingReference { node, target }) => {
                assert_eq!(node, "cup_1");
                assert_eq!(target, "ghost_table");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_names_rejected() {
        let doc = MINIMAL.replace("\"name\": \"cup_1\"", "\"name\": \"counter_1\"");
        assert!(matches!(
            SceneGraph::from_json(&doc),
            Err(SceneError::DuplicateName(n)) if n == "counter_1"
        ));
    }

    #[test]
    fn dangling_room_reference() {
        let doc = MINIMAL.replace("\"room\": \"kitchen\"", "\"room\": \"attic\"");
        assert!(matches!(
            SceneGraph::from_json(&doc),
            Err(SceneError::DanglingReference { node, .. }) if node == "counter_1"
        ));
    }

    #[test]
    fn parse_error_surfaces() {
        assert!(matches!(SceneGraph::from_json("{"), Err(SceneError::Parse(_))));
    }

    #[test]
    fn object_attributes_required() {
        let doc = MINIMAL.replace("\"category\": \"kitchenware\"", "\"category\": \"\"");
        assert!(matches!(
            SceneGraph::from_json(&doc),
            Err(SceneError::MissingAttributes(n)) if n == "cup_1"
        ));
    }

    #[test]
    fn canonical_document_sorts_keys() {
        let g = SceneGraph::from_json(MINIMAL).unwrap();
        let text = g.to_canonical_json();
        let furniture_at = text.find("\"furniture\"").unwrap();
        let objects_at = text.find("\"objects\"").unwrap();
        let rooms_at = text.find("\"rooms\"").unwrap();
        assert!(furniture_at < objects_at && objects_at < rooms_at);
        assert!(text.find("\"attributes\"").unwrap() < text.find("\"name\"").unwrap());
        assert_eq!(SceneGraph::from_json(&text).unwrap(), g);
    }
}
