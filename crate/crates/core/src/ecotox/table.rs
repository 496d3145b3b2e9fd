use super::EcotoxError;

/// A pipe-delimited table with a header row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn parse(name: &str, text: &str) -> Result<Self, EcotoxError> {
        let mut lines = text
            .lines()
            .map(|l| l.strip_suffix('\r').unwrap_or(l))
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, header_line) = lines.next().ok_or_else(|| EcotoxError::Table {
            table: name.to_string(),
            line: 1,
            message: "missing header row".into(),
        })?;
        let mut header: Vec<String> = header_line.split('|').map(|h| h.trim().to_lowercase()).collect();
        while header.last().is_some_and(String::is_empty) {
            header.pop();
        }
        let mut rows = Vec::new();
        for (i, line) in lines {
            let mut cells: Vec<String> = line.split('|').map(|c| c.trim().to_string()).collect();
            if cells.len() > header.len() {
                if cells[header.len()..].iter().any(|c| !c.is_empty()) {
                    return Err(EcotoxError::Table {
                        table: name.to_string(),
                        line: i + 1,
                        message: format!("{} cells for {} columns", cells.len(), header.len()),
                    });
                }
                cells.truncate(header.len());
            }
            cells.resize(header.len(), String::new());
            rows.push(cells);
        }
        Ok(Table {
            name: name.to_string(),
            header,
            rows,
        })
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn require(&self, name: &str) -> Result<usize, EcotoxError> {
        self.column(name).ok_or_else(|| EcotoxError::MissingColumn {
            table: self.name.clone(),
            column: name.to_string(),
        })
    }
}
