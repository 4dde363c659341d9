from pathlib import Path

from rdloop.config import load_config

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def load(name):
    cfg, _raw, _digest = load_config(str(CONFIG_DIR / f"{name}.yaml"))
    return cfg
