"""
Fixtures compartilhadas: dataset padrão, fábrica de unidades sintéticas
e instâncias pequenas de UC.
"""
from pathlib import Path

import pytest

from app.services.fleet import FleetData, ThermalUnit, load_dataset

ROOT = Path(__file__).resolve().parent.parent
FLEET_YAML = ROOT / "config" / "fleet.yaml"


def make_unit(
    uid: str,
    rated: float = 100.0,
    min_power: float = 20.0,
    marginal: float = 30.0,
    slope: float = 1.0,
    tech: str = "steam",
    plant: str = "Tirajana",
    min_up: int = 1,
    min_down: int = 1,
    startup_duration: int = 1,
    startup_types=((1, 100.0),),
    no_load_cost: float = 50.0,
    om_cost: float = 0.0,
    wear_tear_cost: float = 0.0,
    inertia_h: float = 5.0,
    droop_r: float = 0.05,
    agc_factor_ku: float = 1.0,
) -> ThermalUnit:
    """Unidade com dez trechos de largura igual e custo marginal crescente"""
    width = (rated - min_power) / 10.0
    return ThermalUnit(
        id=uid,
        plant=plant,
        tech=tech,
        rated_power=rated,
        min_power=min_power,
        inertia_h=inertia_h,
        droop_r=droop_r,
        agc_factor_ku=agc_factor_ku,
        min_up=min_up,
        min_down=min_down,
        startup_duration=startup_duration,
        startup_types=[{"min_offline_hours": h, "cost": c} for h, c in startup_types],
        cost_segments=[{"width": width, "marginal_cost": marginal + slope * k} for k in range(10)],
        no_load_cost=no_load_cost,
        om_cost=om_cost,
        wear_tear_cost=wear_tear_cost,
    )


@pytest.fixture(scope="session")
def dataset() -> FleetData:
    return load_dataset(str(FLEET_YAML))


@pytest.fixture
def unit_factory():
    return make_unit
