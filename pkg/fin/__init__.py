# FIN placement solver package
