"""
Tabelas de referência do sistema isolado de Gran Canaria.
Parâmetros dos reguladores/turbinas por tecnologia e o programa de
deslastre de carga por subfrequência.
"""

# =============================================================================
# REGULADORES / TURBINAS (constantes em segundos, R em pu, K_d ganho)
# =============================================================================

GOVERNOR_DEFAULTS = {
    # Gás e ciclo combinado
    "TR_g": 0.05,
    "T1_g": 0.6,
    "T2_g": 0.5,
    "T3_g": 0.01,
    "T4_g": 0.24,
    "TD_g": 0.2,
    "R_g": 0.05,
    "R_cc": 0.05,
    "H_g": 5.0,
    "H_cc": 5.0,
    # Diesel
    "T1_d": 0.01,
    "T2_d": 0.0,
    "T3_d": 2.0,
    "T4_d": 0.1,
    "T5_d": 0.1,
    "T6_d": 0.1,
    "K_d": 3.0,
    "R_d": 0.05,
    "H_d": 2.45,
    # Vapor
    "TR_s": 0.2,
    "TSM_s": 0.1,
    "TCH_s": 0.3,
    "R_s": 0.05,
    "H_s": 5.0,
}

# =============================================================================
# DESLASTRE DE CARGA: (limiar Hz, atraso s, MW na ponta, MW no vale)
# =============================================================================

LOAD_SHED_STEPS = [
    (48.9, 0.1, 14.6, 5.8),
    (48.9, 0.2, 16.2, 7.0),
    (48.8, 0.4, 17.1, 8.6),
    (48.8, 0.6, 41.1, 18.8),
    (48.5, 0.1, 8.0, 4.1),
    (48.5, 0.2, 27.3, 11.8),
    (48.4, 0.4, 17.5, 7.7),
    (48.1, 0.1, 17.9, 9.7),
]

# Abaixo disso a simulação é interrompida
COLLAPSE_FREQUENCY_HZ = 47.0

# Tolerância de factibilidade (MW / €)
UC_TOLERANCE = 1e-6

# Janela do RoCoF após o desligamento (s)
ROCOF_WINDOW = (0.3, 0.5)
