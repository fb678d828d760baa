import json
from importlib import resources


def load_schema(name: str) -> dict:
    return json.loads(resources.files("clustered_ising").joinpath(f"schemas/{name}.json").read_text())
