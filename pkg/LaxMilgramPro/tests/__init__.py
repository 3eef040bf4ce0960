# Testes do LaxMilgramPro
