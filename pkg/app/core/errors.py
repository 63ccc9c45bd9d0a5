"""
Exceções de domínio do toolkit de segurança de frequência.
O CLI traduz cada uma para um código de saída (ver EXIT_CODES).
"""
from typing import Optional


class FrequencyToolkitError(Exception):
    """Raiz de todos os erros de domínio"""

    exit_code = 1


class FleetConfigError(FrequencyToolkitError):
    """Arquivo de frota malformado ou invariante violado"""

    def __init__(self, message: str, rule: Optional[str] = None):
        super().__init__(message)
        self.rule = rule


class InfeasibleError(FrequencyToolkitError):
    """Nenhum compromisso atende demanda + reserva"""

    exit_code = 2

    def __init__(self, message: str, hour: Optional[int] = None):
        super().__init__(message)
        self.hour = hour


class InstanceTooLargeError(FrequencyToolkitError):
    """Instância acima da escala de enumeração exaustiva"""


class InitializationError(FrequencyToolkitError):
    """Despacho desbalanceado ou pré-simulação fora do regime permanente"""


class ScenarioError(FrequencyToolkitError):
    """Célula de cenário mal configurada (N-1 impossível, vento acima da capacidade...)"""


class GapNotMetError(FrequencyToolkitError):
    """B&B esgotou o orçamento de nós sem atingir o gap alvo"""

    exit_code = 3


# colapso não é exceção: a série é marcada (TimeSeries.collapsed) e o CLI sai com 4
EXIT_CODES = {
    "ok": 0,
    "usage": 1,
    "infeasible": 2,
    "gap_not_met": 3,
    "collapse": 4,
}
