"""
Venues, trends and a removal experiment
=======================================

Runs the whole command pipeline on the bundled sample into a temporary
directory, then reads back a few of the reports it wrote.
"""

# %%
import json
import tempfile
from pathlib import Path

from ldatrends.pipeline import load_config, run, sample_config_path

out = Path(tempfile.mkdtemp(prefix="ldatrends-demo-"))
cfg = load_config(sample_config_path()).with_overrides(output=str(out))
run("all", cfg)
print(sorted(p.name for p in out.iterdir()))

# %%
# Which venues group together by topic mix.
print((out / "venue_groups.tsv").read_text())

# %%
# Conference versus journal share per topic and year.
print("\n".join((out / "trends_conference.tsv").read_text().splitlines()[:8]))

# %%
# Dropping one venue and refitting: which topics still match?
removal = json.loads((out / "removal.json").read_text())["result"]
for before, ov in zip(removal["topics_before"], removal["best_overlap"]):
    print(f"{ov:.1f}  {' '.join(before[:6])}")
