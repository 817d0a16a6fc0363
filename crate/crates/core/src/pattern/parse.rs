use crate::io::grammar::{parse_counts, parse_element, parse_node, ParseError, Records};

use super::{ElementSpec, PatternError, RefinementPattern};

/// Parses the pattern text format and initializes the result.
///
/// ```text
/// % comment
/// <#nodes> <#elements>
/// <id> <name>
/// <x> <y> <z>            (one line per node)
/// <type> <material> <nodes...>   (one line per element, father first)
/// ```
pub fn parse_pattern(text: &str) -> Result<RefinementPattern, PatternError> {
    let (id, name, nodes, elements) = parse_records(text)?;
    RefinementPattern::new(id, name, nodes, elements)
}

type Parsed = (i64, String, Vec<[f64; 3]>, Vec<ElementSpec>);

pub(crate) fn parse_records(text: &str) -> Result<Parsed, ParseError> {
    let mut recs = Records::new(text);
    let (node_count, element_count) = parse_counts(&recs.next_record("node and element counts")?)?;
    let header = recs.next_record("pattern id and name")?;
    header.expect_len(2, "pattern id and name")?;
    let id: i64 = header.parse(0, "pattern id")?;
    let name = header.tokens[1].to_string();

    let mut nodes = Vec::with_capacity(node_count);
    for _ in 0..node_count {
        nodes.push(parse_node(&recs.next_record("node coordinates")?)?);
    }
    if element_count == 0 {
        return Err(ParseError::new(header.line, "pattern declares no elements"));
    }
    let mut elements: Vec<ElementSpec> = Vec::with_capacity(element_count);
    let mut father_dim = 0;
    for k in 0..element_count {
        let rec = parse_element(&recs.next_record("element")?, node_count)?;
        let dim = rec.element_type.dimension();
        if k == 0 {
            if dim == 0 {
                return Err(ParseError::new(rec.line, "father element cannot be a point"));
            }
            father_dim = dim;
        } else if dim != father_dim {
            return Err(ParseError::new(
                rec.line,
                format!("son of dimension {dim} in a pattern whose father has dimension {father_dim}"),
            ));
        }
        elements.push((rec.element_type, rec.material, rec.nodes));
    }
    recs.expect_end()?;
    Ok((id, name, nodes, elements))
}
