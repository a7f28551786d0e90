//! gnuplot scripts for sweep and tomography outputs.
//!
//! Scripts are written next to the data and reference it by bare file name,
//! so they run from that directory (`gnuplot plot_p11.gp`) and render PNGs.

use std::path::{Path, PathBuf};

use biphoton_core::analytic::Quantity;

use crate::error::{AppError, AppResult};
use crate::output::BASIS_LABELS;

pub const RHO_PARTS: [&str; 2] = ["rho_real", "rho_imag"];

fn sweep_files() -> Vec<String> {
    Quantity::ALL.iter().map(|q| format!("{}.csv", q.name())).collect()
}

fn rho_files() -> Vec<String> {
    RHO_PARTS.iter().map(|p| format!("{p}.csv")).collect()
}

/// Every data file a plot script can refer to.
pub fn expected_files() -> Vec<String> {
    let mut v = sweep_files();
    v.extend(rho_files());
    v
}

fn heatmap(q: Quantity) -> String {
    let name = q.name();
    let (label, range) = match q {
        Quantity::Phase11Rel | Quantity::Phase12Rel => ("rad", "set cbrange [-pi:pi]\n"),
        _ => ("", "set cbrange [0:1]\n"),
    };
    format!(
        "# heatmap of {name} over the (delta_phi, delta_beta/c) grid\n\
         set datafile separator ','\n\
         set terminal pngcairo size 800,640\n\
         set output '{name}.png'\n\
         set title '{name}'\n\
         set xlabel 'delta phi (rad)'\n\
         set ylabel 'delta beta / c'\n\
         set cblabel '{label}'\n\
         {range}\
         set palette rgb 33,13,10\n\
         set xtics ('-pi' -pi, '-pi/2' -pi/2, '0' 0, 'pi/2' pi/2, 'pi' pi)\n\
         plot '{name}.csv' skip 1 using 1:2:3 with image notitle\n"
    )
}

fn bars(part: &str) -> String {
    let title = if part == "rho_real" { "Re rho" } else { "Im rho" };
    let cols: Vec<String> = BASIS_LABELS
        .iter()
        .enumerate()
        .map(|(i, l)| format!("'{part}.csv' using {}:xtic(1) title '{l}'", i + 2))
        .collect();
    format!(
        "# clustered bars of the reconstructed density matrix, one cluster per row\n\
         set datafile separator ','\n\
         set terminal pngcairo size 800,560\n\
         set output '{part}.png'\n\
         set title '{title}'\n\
         set style data histograms\n\
         set style histogram clustered gap 1\n\
         set style fill solid 0.8 border -1\n\
         set yrange [-0.6:0.6]\n\
         set xlabel 'row'\n\
         set key outside right title 'column'\n\
         plot {}\n",
        cols.join(", \\\n     ")
    )
}

/// Writes `plot_<name>.gp` for each complete data group in `dir` and
/// returns the script paths. A group with some files missing, or a directory
/// with no data at all, is an error naming the missing files.
pub fn emit(dir: &Path) -> AppResult<Vec<PathBuf>> {
    let present = |f: &String| dir.join(f).is_file();
    let sweep = sweep_files();
    let rho = rho_files();
    let sweep_have = sweep.iter().filter(|f| present(f)).count();
    let rho_have = rho.iter().filter(|f| present(f)).count();
    let mut missing = Vec::new();
    if sweep_have + rho_have == 0 {
        missing = expected_files();
    } else {
        for group in [&sweep, &rho] {
            let have = group.iter().filter(|f| present(f)).count();
            if have > 0 && have < group.len() {
                missing.extend(group.iter().filter(|f| !present(f)).cloned());
            }
        }
    }
    if !missing.is_empty() {
        return Err(AppError::MissingFiles {
            dir: dir.to_path_buf(),
            missing,
        });
    }
    let mut scripts = Vec::new();
    let mut write = |name: String, text: String| -> AppResult<()> {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(|e| AppError::io(&path, e))?;
        scripts.push(path);
        Ok(())
    };
    if sweep_have > 0 {
        for q in Quantity::ALL {
            write(format!("plot_{}.gp", q.name()), heatmap(q))?;
        }
    }
    if rho_have > 0 {
        for part in RHO_PARTS {
            write(format!("plot_{part}.gp"), bars(part))?;
        }
    }
    Ok(scripts)
}
