// Minimal viewer: colors each area by the aggregate assignment or one method's label.
// The full dashboard replaces these assets.

const LABEL_COLORS = {
  "high-high": "#b2182b", "hot-spot": "#b2182b",
  "low-low": "#2166ac", "cold-spot": "#2166ac",
  "high-low": "#f4a582", "low-high": "#92c5de",
  "other-positive": "#fee08b", "negative-sa": "#fee08b",
  "not-significant": "#e0e0e0", "no-data": "#fafafa", "no-neighbors": "#fafafa",
};

async function load() {
  const [results, geometry] = await Promise.all(
    ["/api/results", "/api/geometry"].map((url) => fetch(url).then((r) => r.json())));
  const idField = results.config.input ? results.config.input.id_field : "id";
  const index = new Map(results.dataset.locations.map((loc, i) => [loc.id, i]));

  const rings = [];
  for (const feature of geometry.features) {
    const id = String(feature.properties[idField] ?? feature.id);
    const g = feature.geometry;
    const polygons = g.type === "Polygon" ? [g.coordinates] : g.coordinates;
    rings.push({ i: index.get(id), polygons });
  }
  let [minX, minY, maxX, maxY] = [Infinity, Infinity, -Infinity, -Infinity];
  for (const { polygons } of rings) for (const p of polygons) for (const [x, y] of p[0]) {
    minX = Math.min(minX, x); maxX = Math.max(maxX, x);
    minY = Math.min(minY, y); maxY = Math.max(maxY, y);
  }
  const scale = Math.min(780 / (maxX - minX), 580 / (maxY - minY));
  const project = ([x, y]) => `${10 + (x - minX) * scale},${590 - (y - minY) * scale}`;

  const svg = document.getElementById("map");
  const paths = rings.map(({ i, polygons }) => {
    const path = document.createElementNS("http://www.w3.org/2000/svg", "path");
    path.setAttribute("d", polygons.flatMap((p) => p.map((r) => "M" + r.map(project).join("L") + "Z")).join(""));
    path.addEventListener("mouseenter", () => describe(i));
    svg.appendChild(path);
    return { i, path };
  });

  const slider = document.getElementById("slider");
  const mode = document.getElementById("mode");
  slider.max = results.dataset.timesteps.length - 1;
  for (const m of ["aggregate", ...results.config.methods]) mode.add(new Option(m, m));

  const timestep = () => results.dataset.timesteps[slider.value];
  function fill(i) {
    if (i === undefined) return "#fafafa";
    if (mode.value === "aggregate") return results.aggregate[timestep()][i].color;
    return LABEL_COLORS[results.local[timestep()][mode.value][i].label];
  }
  function describe(i) {
    if (i === undefined) return;
    const t = timestep();
    const loc = results.dataset.locations[i];
    const lines = [`${loc.name ?? loc.id}  (t = ${t})`, `value ${results.values[i][slider.value]}`];
    for (const m of results.config.methods) {
      const cell = results.local[t][m][i];
      lines.push(`${m}: ${cell.label}  p*=${cell.pseudo_p ?? "-"}`);
    }
    const agg = results.aggregate[t][i];
    lines.push(`aggregate: ${agg.core} h=${agg.h.toFixed(3)}`);
    document.getElementById("details").textContent = lines.join("\n");
  }
  function render() {
    document.getElementById("timestep").textContent = timestep();
    for (const { i, path } of paths) path.setAttribute("fill", fill(i));
  }
  slider.addEventListener("input", render);
  mode.addEventListener("change", render);
  render();
}

load().catch((e) => { document.getElementById("details").textContent = String(e); });
