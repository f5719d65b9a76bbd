//! Builtin machines with their documented block partitions.

use serde::Serialize;

use super::text::parse_automaton;
use crate::error::{Error, Result};
use crate::mealy::MealyMachine;

/// Bartholdi's optimal weights for `(a, b, c, d)` on the first Grigorchuk group.
pub const BARTHOLDI_WEIGHTS: [f64; 4] = [0.305061, 0.34747, 0.223839, 0.123631];

const GRIGORCHUK: &str = "\
a = <e,e> (1,2)
b = <a,c>
c = <a,d>
d = <e,b>
e = <e,e>
";

const T1: &str = "\
a = <e,e,e,e,e,e> (1,2)(3,4)(5,6)
b = <e,e,e,e,e,b> (2,3)(4,5)
c = <a,e,e,e,e,c> (2,3)
d = <a,e,e,e,e,d> (4,5)
e = <e,e,e,e,e,e>
";

const MNOTE: &str = "\
a = <a,e,e,e,e,e,e,e> (3,4)(5,8)(6,7)
b = <e,e,e,e,e,e,b,b^-1> (1,2,3)(4,5,6)
b^-1 = <e,e,e,e,e,e,b^-1,b> (1,3,2)(4,6,5)
e = <e,e,e,e,e,e,e,e>
";

// Read off the level-one Schreier graph.
const Y: &str = "\
a = <a,a,e,e,e,e,e> (3,4)(6,7)
b = <e,e,e,e,b,e,e> (1,2)(3,6)
c = <e,e,e,e,e,e,c> (2,3)(4,5)
e = <e,e,e,e,e,e,e>
";

const XSHAPE: &str = "\
a = <e,e,e,e,e,e,e,e,e,e,e,e,e,e,e,e,e> (1,2)(6,7)(12,13)(15,16)
b = <e,e,e,e,e,e,e,e,e,e,e,e,e,e,e,e,b> (4,5)(7,8)(1,10)(14,15)
c = <e,e,e,e,e,e,e,e,a,e,e,e,e,e,e,e,c> (4,5)(14,15)
d = <e,e,e,e,e,e,e,e,a,e,e,e,e,e,e,e,d> (7,8)(1,10)
a' = <e,e,e,e,e,e,e,e,e,e,e,e,e,e,e,e,b> (3,4)(8,9)(10,11)(1,14)
b' = <e,e,e,e,b',e,e,e,e,e,e,e,e,e,e,e,e> (2,3)(1,6)(11,12)(16,17)
c' = <e,e,e,e,c',e,e,e,e,e,e,e,a',e,e,e,e> (2,3)(16,17)
d' = <e,e,e,e,d',e,e,e,e,e,e,e,a',e,e,e,e> (1,6)(11,12)
e = <e,e,e,e,e,e,e,e,e,e,e,e,e,e,e,e,e>
";

const ADDING: &str = "\
a = <e,a> (1,2)
a^-1 = <a^-1,e> (1,2)
e = <e,e>
";

#[derive(Clone, Debug, Serialize)]
pub struct ZooEntry {
    pub name: &'static str,
    pub states: usize,
    pub letters: usize,
    pub blocks: &'static str,
    pub description: &'static str,
}

const NAMES: [(&str, &str, &str); 8] = [
    ("grigorchuk", "{a},{b,c,d}", "first Grigorchuk group"),
    ("grigorchuk-l2", "{a},{b,c,d}", "first Grigorchuk group acting on pairs of letters"),
    ("grigorchuk-l3", "{a},{b,c,d}", "first Grigorchuk group acting on triples of letters"),
    ("t1-6letters", "{a},{b,c,d}", "six-letter relative of the Grigorchuk group"),
    ("mnote-8letters", "{a},{b,b^-1}", "involution and element of order three on eight letters"),
    ("y-7letters", "{a},{b},{c}", "three involutions on seven letters"),
    ("xshape-17letters", "{a},{b,c,d},{a'},{b',c',d'}", "X-shaped Schreier graph on seventeen letters"),
    ("adding-machine", "free", "binary odometer, infinite cyclic"),
];

fn parse_static(text: &str) -> MealyMachine {
    parse_automaton(text).expect("builtin machines parse")
}

pub fn grigorchuk() -> MealyMachine {
    parse_static(GRIGORCHUK)
}

pub fn t1() -> MealyMachine {
    parse_static(T1)
}

pub fn mnote() -> MealyMachine {
    parse_static(MNOTE)
}

pub fn y_shape() -> MealyMachine {
    parse_static(Y)
}

pub fn x_shape() -> MealyMachine {
    parse_static(XSHAPE)
}

pub fn adding_machine() -> MealyMachine {
    parse_static(ADDING)
}

pub fn builtin(name: &str) -> Result<MealyMachine> {
    match name {
        "grigorchuk" => Ok(grigorchuk()),
        "grigorchuk-l2" => grigorchuk().level_power(2),
        "grigorchuk-l3" => grigorchuk().level_power(3),
        "t1-6letters" => Ok(t1()),
        "mnote-8letters" => Ok(mnote()),
        "y-7letters" => Ok(y_shape()),
        "xshape-17letters" => Ok(x_shape()),
        "adding-machine" => Ok(adding_machine()),
        other => Err(Error::InvalidArgument(format!("no builtin machine named `{other}`"))),
    }
}

/// Documented block partition of a builtin, in the block-list syntax.
pub fn blocks(name: &str) -> Option<&'static str> {
    NAMES.iter().find(|(n, _, _)| *n == name).map(|(_, b, _)| *b)
}

pub fn list() -> Vec<ZooEntry> {
    NAMES
        .iter()
        .map(|&(name, blocks, description)| {
            let m = builtin(name).expect("builtin");
            ZooEntry { name, states: m.num_states(), letters: m.degree(), blocks, description }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        let g = builtin("grigorchuk").unwrap();
        assert_eq!((g.num_states(), g.degree()), (5, 2));
        let m = builtin("mnote-8letters").unwrap();
        assert_eq!(m.state_names(), ["a", "b", "b^-1", "e"]);
        assert_eq!(m.degree(), 8);
        let x = builtin("xshape-17letters").unwrap();
        assert_eq!((x.num_states(), x.degree()), (9, 17));
        assert_eq!(builtin("grigorchuk-l3").unwrap(), grigorchuk().level_power(3).unwrap());
        assert!(builtin("nope").is_err());
    }

    #[test]
    fn all_valid() {
        for e in list() {
            let m = builtin(e.name).unwrap();
            assert!(m.validate().is_valid(), "{}", e.name);
        }
    }
}
