import logging

liepmpLog = logging.getLogger("liepmp")
