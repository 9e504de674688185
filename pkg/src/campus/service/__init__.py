"""Operator-facing service layer: HTTP API, scenario runner, report figures."""

from campus.service.scenario import World, load_scenario, run_scenario

__all__ = ["World", "load_scenario", "run_scenario"]
