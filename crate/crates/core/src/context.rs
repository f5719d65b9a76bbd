use std::sync::Arc;

use crate::aux::AuxGroup;
use crate::error::{Error, Result};
use crate::formats::{parse_automaton, zoo};
use crate::group::Group;
use crate::mealy::MealyMachine;
use crate::portrait::{ElementTable, PortraitCaps};
use crate::weights::{Constraints, Ingested, Weights};

/// A machine with its verified cover, element table and weight constraints.
#[derive(Clone, Debug)]
pub struct Context {
    pub name: String,
    pub group: Arc<Group>,
    pub aux: AuxGroup,
    pub table: Arc<ElementTable>,
    pub constraints: Constraints,
}

impl Context {
    /// `blocks` is a block list such as `{a},{b,c,d}`, `free` or `auto`.
    /// The cover is checked against the machine before use.
    pub fn new(name: impl Into<String>, machine: MealyMachine, blocks: &str, caps: PortraitCaps) -> Result<Context> {
        let group = Group::new(machine)?;
        let aux = AuxGroup::parse_blocks(&group, blocks)?;
        let report = aux.verify_factors(&group);
        if !report.ok {
            return Err(Error::Auxiliary(format!("cover check failed: {report:?}")));
        }
        let constraints = Constraints::from_aux(&aux);
        let table = Arc::new(ElementTable::new(group.clone(), aux.clone(), caps));
        Ok(Context { name: name.into(), group, aux, table, constraints })
    }

    /// A builtin name or automaton text; builtins default to their
    /// documented partition, other machines to block detection.
    pub fn resolve(source: &str, blocks: Option<&str>, caps: PortraitCaps) -> Result<Context> {
        let (name, machine, default_blocks) = match zoo::builtin(source) {
            Ok(m) => (source.to_string(), m, zoo::blocks(source).unwrap_or("auto")),
            Err(_) if source.contains('=') => ("custom".to_string(), parse_automaton(source)?, "auto"),
            Err(e) => return Err(e),
        };
        Context::new(name, machine, blocks.unwrap_or(default_blocks), caps)
    }

    pub fn builtin(name: &str) -> Result<Context> {
        Context::resolve(name, None, PortraitCaps::default())
    }

    pub fn degree(&self) -> usize {
        self.group.degree()
    }

    pub fn num_gens(&self) -> usize {
        self.group.num_gens()
    }

    pub fn ingest(&self, raw: &[f64]) -> Result<Ingested> {
        self.constraints.ingest(raw)
    }

    pub fn uniform(&self) -> Weights {
        Weights::uniform(self.num_gens())
    }

    /// Fresh element table, e.g. for an independent rerun.
    pub fn fresh_table(&self) -> Arc<ElementTable> {
        Arc::new(ElementTable::new(self.group.clone(), self.aux.clone(), self.table.caps()))
    }
}
