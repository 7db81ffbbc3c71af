use roxmltree::{Document, Node};

use super::{CascadeError, CascadeModel, HaarFeature, HaarRect, Stage, WeakClassifier};
use crate::imgproc::Rect;

type Result<T> = std::result::Result<T, CascadeError>;

/// Parses a Haar cascade document.
///
/// The legacy layout (`<size>`, `<stages>/<_>/<trees>` with inline
/// features) is the primary input. The newer OpenCV layout
/// (`<cascade>` with a shared `<features>` table) is accepted as well when
/// every weak classifier is a stump.
pub fn parse_cascade(text: &str) -> Result<CascadeModel> {
    let doc = Document::parse(text).map_err(|e| {
        let pos = e.pos();
        CascadeError::Xml { line: pos.row, column: pos.col, message: e.to_string() }
    })?;
    let p = Parser { doc: &doc };
    let root = doc.root_element();
    let cascade = elements(root)
        .next()
        .ok_or_else(|| p.schema(root, "document has no cascade element"))?;

    let model = if child(cascade, "stageType").is_some() || child(cascade, "features").is_some() {
        p.modern(cascade)?
    } else {
        p.legacy(cascade)?
    };
    p.validate(cascade, &model)?;
    Ok(model)
}

fn elements<'a, 'i>(node: Node<'a, 'i>) -> impl Iterator<Item = Node<'a, 'i>> {
    node.children().filter(|n| n.is_element())
}

fn child<'a, 'i>(node: Node<'a, 'i>, name: &str) -> Option<Node<'a, 'i>> {
    elements(node).find(|n| n.has_tag_name(name))
}

fn items<'a, 'i>(node: Node<'a, 'i>) -> impl Iterator<Item = Node<'a, 'i>> {
    elements(node).filter(|n| n.has_tag_name("_"))
}

fn text_of<'a>(node: Node<'a, '_>) -> String {
    node.descendants().filter(|n| n.is_text()).filter_map(|n| n.text()).collect()
}

struct Parser<'d, 'i> {
    doc: &'d Document<'i>,
}

impl<'d, 'i> Parser<'d, 'i> {
    fn line(&self, node: Node) -> u32 {
        self.doc.text_pos_at(node.range().start).row
    }

    fn schema(&self, node: Node, message: impl Into<String>) -> CascadeError {
        CascadeError::Schema { line: self.line(node), message: message.into() }
    }

    fn unsupported(&self, node: Node, construct: impl Into<String>) -> CascadeError {
        CascadeError::Unsupported { line: self.line(node), construct: construct.into() }
    }

    fn require<'a>(&self, node: Node<'a, 'i>, name: &str) -> Result<Node<'a, 'i>>
    where
        'd: 'a,
    {
        child(node, name).ok_or_else(|| self.schema(node, format!("missing <{name}> in <{}>", node.tag_name().name())))
    }

    fn numbers(&self, node: Node) -> Result<Vec<f64>> {
        text_of(node)
            .split_ascii_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| self.schema(node, format!("invalid number {tok:?}")))
            })
            .collect()
    }

    fn number(&self, node: Node) -> Result<f64> {
        match self.numbers(node)?.as_slice() {
            [v] => Ok(*v),
            other => Err(self.schema(node, format!("expected one number, found {}", other.len()))),
        }
    }

    fn uint(&self, node: Node, v: f64) -> Result<u32> {
        if v < 0.0 || v.fract() != 0.0 || v > u32::MAX as f64 {
            return Err(self.schema(node, format!("expected a non-negative integer, found {v}")));
        }
        Ok(v as u32)
    }

    fn rects(&self, rects: Node) -> Result<Vec<HaarRect>> {
        items(rects)
            .map(|r| match self.numbers(r)?.as_slice() {
                &[x, y, w, h, weight] => Ok(HaarRect {
                    rect: Rect::new(self.uint(r, x)?, self.uint(r, y)?, self.uint(r, w)?, self.uint(r, h)?),
                    weight,
                }),
                other => Err(self.schema(r, format!("rect needs 5 numbers (x y w h weight), found {}", other.len()))),
            })
            .collect()
    }

    fn feature(&self, feature: Node) -> Result<HaarFeature> {
        if let Some(t) = child(feature, "tilted") {
            if self.number(t)? != 0.0 {
                return Err(self.unsupported(t, "tilted (45 degree) Haar feature"));
            }
        }
        Ok(HaarFeature { rects: self.rects(self.require(feature, "rects")?)? })
    }

    fn legacy(&self, cascade: Node) -> Result<CascadeModel> {
        let size = self.require(cascade, "size")?;
        let (window_w, window_h) = match self.numbers(size)?.as_slice() {
            &[w, h] => (self.uint(size, w)?, self.uint(size, h)?),
            _ => return Err(self.schema(size, "<size> must hold two integers")),
        };
        let mut stages = Vec::new();
        for (si, stage) in items(self.require(cascade, "stages")?).enumerate() {
            let mut classifiers = Vec::new();
            for (ti, tree) in items(self.require(stage, "trees")?).enumerate() {
                let nodes: Vec<_> = items(tree).collect();
                let node = match nodes.as_slice() {
                    [n] => *n,
                    [] => return Err(self.schema(tree, format!("stage {si} tree {ti} has no nodes"))),
                    _ => {
                        return Err(self.unsupported(
                            tree,
                            format!("tree-structured weak classifier with {} nodes (stage {si} tree {ti})", nodes.len()),
                        ))
                    }
                };
                if child(node, "left_node").is_some() || child(node, "right_node").is_some() {
                    return Err(self.unsupported(node, format!("tree-structured weak classifier (stage {si} tree {ti})")));
                }
                classifiers.push(WeakClassifier {
                    feature: self.feature(self.require(node, "feature")?)?,
                    threshold: self.number(self.require(node, "threshold")?)?,
                    left_val: self.number(self.require(node, "left_val")?)?,
                    right_val: self.number(self.require(node, "right_val")?)?,
                });
            }
            let stage_threshold = self.number(self.require(stage, "stage_threshold")?)?;
            stages.push(Stage { classifiers, stage_threshold });
        }
        Ok(CascadeModel {
            name: cascade.tag_name().name().to_string(),
            window_w,
            window_h,
            stages,
        })
    }

    fn modern(&self, cascade: Node) -> Result<CascadeModel> {
        for (tag, want) in [("stageType", "BOOST"), ("featureType", "HAAR")] {
            if let Some(n) = child(cascade, tag) {
                let got = text_of(n);
                if got.trim() != want {
                    return Err(self.unsupported(n, format!("{tag} {}", got.trim())));
                }
            }
        }
        let width = self.require(cascade, "width")?;
        let height = self.require(cascade, "height")?;
        let window_w = self.uint(width, self.number(width)?)?;
        let window_h = self.uint(height, self.number(height)?)?;

        let features = items(self.require(cascade, "features")?)
            .map(|f| self.feature(f))
            .collect::<Result<Vec<_>>>()?;

        let mut stages = Vec::new();
        for (si, stage) in items(self.require(cascade, "stages")?).enumerate() {
            let mut classifiers = Vec::new();
            for (wi, weak) in items(self.require(stage, "weakClassifiers")?).enumerate() {
                let nodes_el = self.require(weak, "internalNodes")?;
                let nodes = self.numbers(nodes_el)?;
                let leaves = self.numbers(self.require(weak, "leafValues")?)?;
                if nodes.len() != 4 || leaves.len() != 2 {
                    return Err(self.unsupported(
                        weak,
                        format!("tree-structured weak classifier with {} nodes (stage {si} classifier {wi})", nodes.len() / 4),
                    ));
                }
                let idx = self.uint(nodes_el, nodes[2])? as usize;
                let feature = features
                    .get(idx)
                    .cloned()
                    .ok_or_else(|| self.schema(nodes_el, format!("feature index {idx} out of range")))?;
                classifiers.push(WeakClassifier {
                    feature,
                    threshold: nodes[3],
                    left_val: leaves[0],
                    right_val: leaves[1],
                });
            }
            let stage_threshold = self.number(self.require(stage, "stageThreshold")?)?;
            stages.push(Stage { classifiers, stage_threshold });
        }
        Ok(CascadeModel { name: "cascade".into(), window_w, window_h, stages })
    }

    fn validate(&self, at: Node, m: &CascadeModel) -> Result<()> {
        if m.window_w < 4 || m.window_h < 4 {
            return Err(self.schema(at, format!("window {}x{} is smaller than 4x4", m.window_w, m.window_h)));
        }
        if m.stages.is_empty() {
            return Err(self.schema(at, "cascade has no stages"));
        }
        for (si, stage) in m.stages.iter().enumerate() {
            if stage.classifiers.is_empty() {
                return Err(self.schema(at, format!("stage {si} has no classifiers")));
            }
            for (ci, c) in stage.classifiers.iter().enumerate() {
                let rects = &c.feature.rects;
                if !(2..=3).contains(&rects.len()) {
                    return Err(self.schema(at, format!("stage {si} classifier {ci}: feature has {} rects (2 or 3 allowed)", rects.len())));
                }
                if !rects.iter().any(|r| r.weight < 0.0) || !rects.iter().any(|r| r.weight > 0.0) {
                    return Err(self.schema(at, format!("stage {si} classifier {ci}: feature weights need both signs")));
                }
                if let Some(r) = rects.iter().find(|r| !r.rect.fits(m.window_w, m.window_h)) {
                    return Err(self.schema(at, format!("stage {si} classifier {ci}: rect {} leaves the {}x{} window", r.rect, m.window_w, m.window_h)));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const STUMP: &str = r#"<?xml version="1.0"?>
<opencv_storage>
<mini type_id="opencv-haar-classifier">
  <size>8 6</size>
  <stages>
    <_>
      <trees>
        <_>
          <_>
            <feature>
              <rects>
                <_>0 0 8 6 -1.</_>
                <_>2 1 4 3 3.5e0</_></rects>
              <tilted>0</tilted></feature>
            <threshold>-1.25e-02</threshold>
            <left_val>0.75</left_val>
            <right_val>-0.5</right_val></_></_></trees>
      <stage_threshold>-0.125</stage_threshold>
      <parent>-1</parent>
      <next>-1</next></_></stages></mini>
</opencv_storage>
"#;

    #[test]
    fn parses_literal_values() {
        let m = parse_cascade(STUMP).unwrap();
        assert_eq!((m.name.as_str(), m.window_w, m.window_h), ("mini", 8, 6));
        assert_eq!(m.stages.len(), 1);
        let c = &m.stages[0].classifiers[0];
        assert_eq!(c.feature.rects[0], HaarRect { rect: Rect::new(0, 0, 8, 6), weight: -1.0 });
        assert_eq!(c.feature.rects[1], HaarRect { rect: Rect::new(2, 1, 4, 3), weight: 3.5 });
        assert_eq!((c.threshold, c.left_val, c.right_val), (-0.0125, 0.75, -0.5));
        assert_eq!(m.stages[0].stage_threshold, -0.125);
    }

    #[test]
    fn empty_and_broken_documents() {
        assert!(matches!(parse_cascade(""), Err(CascadeError::Xml { .. })));
        let err = parse_cascade("<a>\n<b>\n</a>").unwrap_err();
        assert!(matches!(err, CascadeError::Xml { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn missing_size_is_schema_error() {
        let doc = STUMP.replace("<size>8 6</size>", "");
        assert!(matches!(parse_cascade(&doc), Err(CascadeError::Schema { .. })));
    }

    #[test]
    fn tilted_feature_rejected() {
        let doc = STUMP.replace("<tilted>0</tilted>", "<tilted>1</tilted>");
        let err = parse_cascade(&doc).unwrap_err();
        assert!(matches!(&err, CascadeError::Unsupported { construct, .. } if construct.contains("tilted")), "{err:?}");
    }

    #[test]
    fn tree_node_rejected() {
        let doc = STUMP.replace("<left_val>0.75</left_val>", "<left_node>1</left_node>");
        let err = parse_cascade(&doc).unwrap_err();
        assert!(matches!(&err, CascadeError::Unsupported { construct, .. } if construct.contains("tree")), "{err:?}");
    }

    #[test]
    fn rect_outside_window_rejected() {
        let doc = STUMP.replace("<_>2 1 4 3 3.5e0</_>", "<_>6 1 4 3 3.5e0</_>");
        assert!(matches!(parse_cascade(&doc), Err(CascadeError::Schema { .. })));
    }

    #[test]
    fn single_signed_weights_rejected() {
        let doc = STUMP.replace("0 0 8 6 -1.", "0 0 8 6 1.");
        assert!(matches!(parse_cascade(&doc), Err(CascadeError::Schema { .. })));
    }

    #[test]
    fn modern_layout() {
        let doc = r#"<opencv_storage><cascade type_id="opencv-cascade-classifier">
  <stageType>BOOST</stageType><featureType>HAAR</featureType>
  <height>6</height><width>8</width>
  <stages><_><maxWeakCount>1</maxWeakCount><stageThreshold>-0.125</stageThreshold>
    <weakClassifiers><_><internalNodes>0 -1 0 -1.25e-02</internalNodes>
      <leafValues>0.75 -0.5</leafValues></_></weakClassifiers></_></stages>
  <features><_><rects><_>0 0 8 6 -1.</_><_>2 1 4 3 3.5e0</_></rects></_></features>
</cascade></opencv_storage>"#;
        let mut m = parse_cascade(doc).unwrap();
        let mut legacy = parse_cascade(STUMP).unwrap();
        m.name.clear();
        legacy.name.clear();
        assert_eq!(m, legacy);

        let tree = doc.replace("0 -1 0 -1.25e-02", "1 -1 0 -1.25e-02 0 -2 0 1.0").replace("0.75 -0.5", "0.75 -0.5 0.1");
        assert!(matches!(parse_cascade(&tree), Err(CascadeError::Unsupported { .. })));
    }
}
