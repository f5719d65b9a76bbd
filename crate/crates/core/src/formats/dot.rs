//! Graphviz export of machine diagrams and level-one Schreier graphs.

use std::fmt::Write;

use crate::mealy::MealyMachine;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// One edge per `(state, letter)`, labelled `x|y`.
pub fn diagram_dot(m: &MealyMachine) -> String {
    let names = m.state_names();
    let letters = m.letter_names();
    let mut out = String::from("digraph machine {\n  rankdir=LR;\n");
    for name in names {
        writeln!(out, "  {} [shape=circle];", quote(name)).unwrap();
    }
    for q in 0..m.num_states() {
        for x in 0..m.degree() {
            writeln!(
                out,
                "  {} -> {} [label={}];",
                quote(&names[q]),
                quote(&names[m.delta(q, x)]),
                quote(&format!("{}|{}", letters[x], letters[m.rho(q, x)]))
            )
            .unwrap();
        }
    }
    out.push_str("}\n");
    out
}

/// Action graph on the alphabet: one edge `x -> ρ_q(x)` per non-identity
/// state, labelled with the state name. This is the diagram of the dual
/// with the output labels dropped.
pub fn schreier_dot(m: &MealyMachine) -> String {
    let letters = m.letter_names();
    let mut out = String::from("digraph schreier {\n");
    for name in letters {
        writeln!(out, "  {} [shape=circle];", quote(name)).unwrap();
    }
    for x in 0..m.degree() {
        for q in 0..m.num_states() {
            if Some(q) == m.identity_state() {
                continue;
            }
            writeln!(
                out,
                "  {} -> {} [label={}];",
                quote(&letters[x]),
                quote(&letters[m.rho(q, x)]),
                quote(&m.state_names()[q])
            )
            .unwrap();
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formats::zoo;

    #[test]
    fn grigorchuk_diagram_counts() {
        let m = zoo::grigorchuk();
        let dot = diagram_dot(&m);
        assert_eq!(dot.matches("shape=circle").count(), 5);
        assert_eq!(dot.matches(" -> ").count(), 10);
        assert!(dot.contains("\"a\" -> \"e\" [label=\"1|2\"]"));
        assert_eq!(dot, diagram_dot(&zoo::grigorchuk()));
    }

    #[test]
    fn grigorchuk_schreier_has_two_nodes() {
        let dot = schreier_dot(&zoo::grigorchuk());
        assert_eq!(dot.matches("shape=circle").count(), 2);
        assert!(dot.contains("\"1\" -> \"2\" [label=\"a\"]"));
        // The dual diagram has the same vertex set.
        assert_eq!(diagram_dot(&zoo::grigorchuk().dual()).matches("shape=circle").count(), 2);
    }
}
