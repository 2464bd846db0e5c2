use clusterlens_core::pipeline::{read_results, ResultSet};

use crate::{Failure, InspectArgs};

fn print_table(header: &[String], rows: &[Vec<String>]) {
    let widths: Vec<usize> = (0..header.len())
        .map(|c| {
            rows.iter()
                .map(|r| r[c].len())
                .chain([header[c].len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let line = |cells: &[String]| {
        let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        println!("{}", padded.join("  ").trim_end());
    };
    line(header);
    for row in rows {
        line(row);
    }
}

fn selected_timesteps(rs: &ResultSet, only: Option<&str>) -> Result<Vec<String>, Failure> {
    match only {
        None => Ok(rs.dataset.timesteps.clone()),
        Some(t) if rs.dataset.timesteps.iter().any(|x| x == t) => Ok(vec![t.to_string()]),
        Some(t) => Err(Failure::input(format!("unknown timestep {t}"))),
    }
}

pub fn inspect(args: InspectArgs) -> Result<(), Failure> {
    let rs = read_results(&args.results).map_err(|e| Failure::input(e.to_string()))?;
    let timesteps = selected_timesteps(&rs, args.timestep.as_deref())?;
    let mut header = vec!["method".to_string()];
    header.extend(timesteps.iter().cloned());
    let methods = &rs.config.run.methods;

    let Some(id) = args.location else {
        println!("global labels");
        let rows: Vec<Vec<String>> = methods
            .iter()
            .map(|m| {
                let mut row = vec![format!("{m} ({})", m.global_kind())];
                for t in &timesteps {
                    let label = rs
                        .global
                        .get(t)
                        .and_then(|g| g.get(m))
                        .map_or("skipped", |r| r.label.as_str());
                    row.push(label.to_string());
                }
                row
            })
            .collect();
        print_table(&header, &rows);
        return Ok(());
    };

    let i = rs
        .location_index(&id)
        .ok_or_else(|| Failure::input(format!("unknown location {id}")))?;
    let location = &rs.dataset.locations[i];
    match &location.name {
        Some(name) => println!("location {id} ({name})"),
        None => println!("location {id}"),
    }
    let mut rows: Vec<Vec<String>> = methods
        .iter()
        .map(|m| {
            let mut row = vec![m.to_string()];
            for t in &timesteps {
                let label = rs
                    .local
                    .get(t)
                    .and_then(|l| l.get(m))
                    .map(|cells| cells[i].label.as_str());
                row.push(label.unwrap_or("-").to_string());
            }
            row
        })
        .collect();
    let mut aggregate = vec!["aggregate".to_string()];
    for t in &timesteps {
        let cell = rs.aggregate.get(t).map(|cells| &cells[i]);
        aggregate.push(cell.map_or("-".to_string(), |c| format!("{} {}", c.core.as_str(), c.color)));
    }
    rows.push(aggregate);
    print_table(&header, &rows);
    Ok(())
}
