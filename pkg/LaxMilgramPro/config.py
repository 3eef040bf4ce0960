# Configurações do LaxMilgramPro
import os
from pathlib import Path

from dotenv import load_dotenv

# Carregar variáveis do arquivo .env
load_dotenv()

PACKAGE_ROOT = Path(__file__).resolve().parent

# Perfil de templates (pasta em Template/) com os YAML de tolerâncias e cenários
TEMPLATE_PROFILE = os.getenv("LMP_TEMPLATE", "standard")

TEMPLATE_DIR = PACKAGE_ROOT / "Template" / TEMPLATE_PROFILE

if not TEMPLATE_DIR.is_dir():
    raise ValueError(
        f"Perfil de template '{TEMPLATE_PROFILE}' não encontrado em {TEMPLATE_DIR}. "
        "Ajuste a variável de ambiente LMP_TEMPLATE ou o arquivo .env."
    )

# Nível de log usado pelo CLI (coloredlogs)
LOG_LEVEL = os.getenv("LMP_LOG_LEVEL", "INFO")

# Diretório padrão para relatórios JSON
REPORT_DIR = os.getenv("LMP_REPORT_DIR", "reports")

# Número de threads nas buscas por testemunhas/violações
WORKERS = int(os.getenv("LMP_WORKERS", "1"))


def template_path(filename: str) -> Path:
    """Resolve a file inside the active template profile."""
    return TEMPLATE_DIR / filename
