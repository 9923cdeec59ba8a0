"""
A planned run with an external training command
================================================

Each trial is a child process: one JSON request on stdin, one JSON metric
line on stdout.  The run directory keeps the plan, the append-only trial
log and the reports, so an interrupted run picks up where it stopped.
"""

# %%
import json
from pathlib import Path
import sys
import tempfile

from oatune.casestudy import rnn_config
from oatune.cli import main

work = Path(tempfile.mkdtemp(prefix="oat-demo-"))

# %%
# a stand-in training script; a real one would train and evaluate a model
train = work / "train.py"
train.write_text(
    "import json, sys\n"
    "from oatune.synth import eval_synthetic, fit_to_table4\n"
    "req = json.loads(sys.stdin.readline())\n"
    "print('epoch 1 ... done', flush=True)\n"
    "print(json.dumps(eval_synthetic(fit_to_table4(), req['assignment'])))\n"
)
config = work / "rnn.json"
config.write_text(json.dumps(rnn_config([sys.executable, str(train)], repetitions=2), ensure_ascii=False))

# %%
run_dir = str(work / "run")
main(["plan", "--config", str(config), "--run-dir", run_dir])

# %%
main(["run", "--run-dir", run_dir, "--parallelism", "3"])
print((work / "run" / "trials.log").read_text(encoding="utf-8").splitlines()[0])

# %%
main(["analyze", "--run-dir", run_dir])

# %%
main(["confirm", "--run-dir", run_dir])

# %%
# running again finds every row logged and does no work
main(["run", "--run-dir", run_dir])
