"""Water-tap scenario objects built in code, for tests that want them without a file."""

from pathlib import Path

from scenguard.demos import data_path
from scenguard.events import Event
from scenguard.scenario import ScenarioObject

DATA = Path(str(data_path("")))


def add_hot_water():
    return ScenarioObject(
        "AddHotWater",
        ["idle", "h1", "h2", "h3"],
        "idle",
        {"idle": [("WaterLow", "h1")], "h1": [("AddHot", "h2")], "h2": [("AddHot", "h3")], "h3": [("AddHot", "idle")]},
        {q: [Event("AddHot")] for q in ("h1", "h2", "h3")},
    )


def add_cold_water():
    return ScenarioObject(
        "AddColdWater",
        ["idle", "c1", "c2", "c3"],
        "idle",
        {"idle": [("WaterLow", "c1")], "c1": [("AddCold", "c2")], "c2": [("AddCold", "c3")], "c3": [("AddCold", "idle")]},
        {q: [Event("AddCold")] for q in ("c1", "c2", "c3")},
    )


def stability():
    return ScenarioObject(
        "Stability",
        ["s1", "s2"],
        "s1",
        {"s1": [("AddHot", "s2")], "s2": [("AddCold", "s1")]},
        {},
        {"s1": ["AddCold"], "s2": ["AddHot"]},
    )


def environment(one_shot=False):
    if one_shot:
        return ScenarioObject(
            "Environment", ["low", "done"], "low", {"low": [("WaterLow", "done")]}, {"low": [Event("WaterLow")]}
        )
    return ScenarioObject("Environment", ["low"], "low", {"low": [("WaterLow", "low")]}, {"low": [Event("WaterLow")]})
