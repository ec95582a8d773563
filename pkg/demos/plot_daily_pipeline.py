"""
A week of bulletins, end to end
===============================

Forge synthetic bulletins for two states, run every stage offline and look
at the outputs: the SQL dump, the QA log and the report pages.
"""

import tempfile
from pathlib import Path

from bulletinkit.analytics import compute_metric
from bulletinkit.forge import forge_bulletins
from bulletinkit.pipeline import run_pipeline
from bulletinkit.store import list_qa

data = Path(tempfile.mkdtemp(prefix="bulletinkit-demo-"))

# Fourteen days per state; one Delhi bulletin arrives truncated.
forge_bulletins(data, ("DL", "WB"), "2021-04-05", 14, seed=1, corrupt={("DL", "2021-04-09"): "truncated"})

report = run_pipeline(["DL", "WB"], data_dir=data, fetch=False, report_dir=data / "report")
print(report.to_text())

for q in list_qa(data / "covid_india.db", severity="error"):
    print(q.state_code, q.date, q.sql_table, q.code)

for p in compute_metric(data / "covid_india.db", "WB", "weekly_cfr"):
    print(p.period_start, p.value)

print("outputs in", data)
